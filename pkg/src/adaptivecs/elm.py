"""Single-hidden-layer extreme learning machines.

The hidden layer is a random projection drawn once and frozen; only the
output weights are ever trained. ``ElmRegressor`` solves the output weights
in one regularized least-squares shot, ``OselmRegressor`` keeps a
covariance-style matrix P and folds in data chunk by chunk, which is
algebraically the recursive-least-squares form of the same ridge problem.
"""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from ._validation import check_matrix, check_rng
from .numerics import sigmoid, sigmoid_grad, solve

ACTIVATIONS = {
    "sigmoid": (sigmoid, sigmoid_grad),
    "tanh": (np.tanh, lambda z: 1.0 - np.tanh(z) ** 2),
    "identity": (lambda z: z, lambda z: np.ones_like(z)),
}


def _mat_payload(arr):
    arr = np.atleast_2d(np.asarray(arr, dtype=np.float64))
    return {"rows": arr.shape[0], "cols": arr.shape[1], "data": arr.ravel().tolist()}


def _mat_from_payload(payload):
    arr = np.asarray(payload["data"], dtype=np.float64)
    return arr.reshape(payload["rows"], payload["cols"])


class ElmRegressor(BaseEstimator, RegressorMixin):
    """Batch-trained ELM: beta = (H'H + ridge*I)^-1 H'Y.

    With ridge=0 and a full-column-rank hidden matrix this is the
    pseudo-inverse solution. Input weights and biases are drawn uniform on
    [0, 1] at first fit and never change afterwards.

    Parameters
    ----------
    hidden_dim : int
        Number of hidden units.
    ridge : float
        Regularization weight; 0 is allowed only when H'H is invertible.
    activation : str
        Hidden activation, one of ``ACTIVATIONS``.
    random_state : int, Generator or None
        Source for the frozen input weights.
    """

    def __init__(self, hidden_dim=400, ridge=1e-3, activation="sigmoid", random_state=None):
        self.hidden_dim = hidden_dim
        self.ridge = ridge
        self.activation = activation
        self.random_state = random_state

    def _activation_fns(self):
        try:
            return ACTIVATIONS[self.activation]
        except KeyError:
            raise ValueError(f"unknown activation {self.activation!r}") from None

    def _ensure_layer(self, input_dim, rng=None):
        if getattr(self, "alpha_", None) is not None:
            if self.alpha_.shape[0] != input_dim:
                raise ValueError(
                    f"input dim {input_dim} does not match layer "
                    f"({self.alpha_.shape[0]} inputs)"
                )
            return
        rng = check_rng(self.random_state) if rng is None else rng
        self.alpha_ = rng.uniform(0.0, 1.0, size=(input_dim, int(self.hidden_dim)))
        self.b_ = rng.uniform(0.0, 1.0, size=int(self.hidden_dim))

    def init_random(self, input_dim, out_dim, rng=None, output_scale=1.0):
        """Draw the frozen layer plus uniform output weights scaled by ``output_scale``.

        Gives the learner a usable forward pass before any data has been
        fit; the first fit replaces the output weights.
        """
        rng = check_rng(self.random_state) if rng is None else rng
        self.alpha_ = None
        self._ensure_layer(int(input_dim), rng)
        self.beta_ = rng.uniform(0.0, 1.0, size=(int(self.hidden_dim), int(out_dim)))
        self.beta_ *= float(output_scale)
        self.n_outputs_ = int(out_dim)
        self._y_1d = out_dim == 1
        return self

    def _check_fitted(self):
        if getattr(self, "beta_", None) is None:
            raise NotFittedError(
                f"this {type(self).__name__} has no output weights; call fit first"
            )

    def _prepare_y(self, X, y):
        y = np.asarray(y, dtype=np.float64)
        y_1d = y.ndim == 1
        Y = y[:, None] if y_1d else y
        if Y.shape[0] != X.shape[0]:
            raise ValueError(f"X has {X.shape[0]} rows but y has {Y.shape[0]}")
        if not np.isfinite(Y).all():
            raise ValueError("y contains NaN or Inf entries")
        return Y, y_1d

    def hidden(self, X):
        """Hidden-layer activations g(X alpha + b), one row per sample."""
        X = check_matrix(X, "X")
        if getattr(self, "alpha_", None) is None:
            raise NotFittedError("hidden layer not drawn yet; call fit or init_random")
        if X.shape[1] != self.alpha_.shape[0]:
            raise ValueError(
                f"X has {X.shape[1]} columns, layer expects {self.alpha_.shape[0]}"
            )
        act, _ = self._activation_fns()
        return act(X @ self.alpha_ + self.b_)

    def fit(self, X, y):
        X = check_matrix(X, "X")
        Y, y_1d = self._prepare_y(X, y)
        self._ensure_layer(X.shape[1])
        H = self.hidden(X)
        delta = float(self.ridge)
        gram = H.T @ H
        if delta > 0.0:
            gram = gram + delta * np.eye(H.shape[1])
        self.beta_ = solve(gram, H.T @ Y)
        self.n_outputs_ = Y.shape[1]
        self._y_1d = y_1d
        return self

    def predict(self, X):
        self._check_fitted()
        out = self.hidden(X) @ self.beta_
        return out[:, 0] if self._y_1d else out


class OselmRegressor(ElmRegressor):
    """Sequential ELM with a recursive P-matrix update.

    ``fit`` runs the regularized initialization
    P0 = (H0'H0 + ridge*I)^-1, beta0 = P0 H0' Y0; ``partial_fit`` folds in
    one more chunk:

        P <- P - P H' (forgetting*I + H P H')^-1 H P
        beta <- beta + P H' (Y - H beta)

    P is re-symmetrized after every step to arrest drift. With
    forgetting=1 the sequence of updates reproduces the batch ridge
    solution on the union of all chunks.

    Parameters
    ----------
    forgetting : float
        Weight of the identity block in the inverted term; 1.0 means no
        forgetting. Applied exactly as written above.
    """

    def __init__(
        self,
        hidden_dim=400,
        ridge=1e-3,
        forgetting=1.0,
        activation="sigmoid",
        random_state=None,
    ):
        super().__init__(
            hidden_dim=hidden_dim,
            ridge=ridge,
            activation=activation,
            random_state=random_state,
        )
        self.forgetting = forgetting

    @property
    def initialized_(self):
        return getattr(self, "P_", None) is not None

    def fit(self, X, y):
        """Initialize P and the output weights from the first chunk."""
        if float(self.ridge) <= 0.0:
            raise ValueError("sequential initialization requires ridge > 0")
        if float(self.forgetting) <= 0.0:
            raise ValueError("forgetting must be > 0")
        X = check_matrix(X, "X")
        Y, y_1d = self._prepare_y(X, y)
        self._ensure_layer(X.shape[1])
        H = self.hidden(X)
        k = H.shape[1]
        gram = H.T @ H + float(self.ridge) * np.eye(k)
        P = solve(gram, np.eye(k))
        self.P_ = (P + P.T) / 2.0
        self.beta_ = self.P_ @ (H.T @ Y)
        self.n_outputs_ = Y.shape[1]
        self._y_1d = y_1d
        return self

    def partial_fit(self, X, y):
        """Fold one chunk into P and beta; initializes on the first call."""
        if not self.initialized_:
            return self.fit(X, y)
        X = check_matrix(X, "X")
        Y, _ = self._prepare_y(X, y)
        if Y.shape[1] != self.n_outputs_:
            raise ValueError(
                f"chunk has {Y.shape[1]} outputs, learner was fit with {self.n_outputs_}"
            )
        H = self.hidden(X)
        PHt = self.P_ @ H.T
        inner = float(self.forgetting) * np.eye(H.shape[0]) + H @ PHt
        P = self.P_ - PHt @ solve(inner, PHt.T)
        self.P_ = (P + P.T) / 2.0
        self.beta_ = self.beta_ + self.P_ @ (H.T @ (Y - H @ self.beta_))
        return self

    def to_checkpoint(self):
        """JSON-safe snapshot: dimensions in headers, matrices row-major."""
        self._check_fitted()
        payload = {
            "kind": "oselm",
            "hidden_dim": int(self.hidden_dim),
            "ridge": float(self.ridge),
            "forgetting": float(self.forgetting),
            "activation": self.activation,
            "n_outputs": int(self.n_outputs_),
            "y_1d": bool(self._y_1d),
            "alpha": _mat_payload(self.alpha_),
            "b": _mat_payload(self.b_),
            "beta": _mat_payload(self.beta_),
            "P": _mat_payload(self.P_) if self.initialized_ else None,
        }
        return payload

    @classmethod
    def from_checkpoint(cls, payload):
        if payload.get("kind") != "oselm":
            raise ValueError(f"not an oselm checkpoint: kind={payload.get('kind')!r}")
        learner = cls(
            hidden_dim=payload["hidden_dim"],
            ridge=payload["ridge"],
            forgetting=payload["forgetting"],
            activation=payload["activation"],
        )
        learner.alpha_ = _mat_from_payload(payload["alpha"])
        learner.b_ = _mat_from_payload(payload["b"]).ravel()
        learner.beta_ = _mat_from_payload(payload["beta"])
        learner.n_outputs_ = int(payload["n_outputs"])
        learner._y_1d = bool(payload["y_1d"])
        learner.P_ = _mat_from_payload(payload["P"]) if payload["P"] is not None else None
        return learner
