"""Online agents that pick a compression ratio per datum.

Two learners share the same interface (``select`` an action for a state,
``observe`` the outcome, ``predict`` greedy actions in batch):

* ``OsQNetAgent`` scores a fixed grid of candidate ratios with a sequential
  ELM over (state, action) pairs and picks the argmax, epsilon-greedy.
* ``AcOselmAgent`` keeps the action continuous: a deterministic actor
  network proposes the ratio and a sequential-ELM critic scores it; the
  actor's output weights climb the critic's action gradient
  (a deterministic policy-gradient step).

Both collect transitions into a small buffer and train every
``update_period`` observations, then drop the buffer. The first training
pass runs the learner's initialization step, later passes the recursive
update. Bootstrapped reward targets are computed when a transition is
stored, using the value estimates of that moment.
"""

import math

import numpy as np

from ._validation import check_rng
from .elm import OselmRegressor, _mat_from_payload, _mat_payload
from .numerics import sigmoid, sigmoid_grad


def exp_schedule(t, start, floor, decay):
    """start * exp(-t / decay), clipped below at floor."""
    return max(float(floor), float(start) * math.exp(-float(t) / float(decay)))


class ReplayBuffer:
    """Transition list that fills between updates and is then cleared."""

    def __init__(self):
        self._items = []

    def __len__(self):
        return len(self._items)

    def add(self, state, action, reward, next_state=None):
        self._items.append((
            np.asarray(state, dtype=np.float64),
            np.atleast_1d(np.asarray(action, dtype=np.float64)),
            float(reward),
            None if next_state is None else np.asarray(next_state, dtype=np.float64),
        ))

    def items(self):
        return list(self._items)

    def clear(self):
        self._items = []


def _as_state(state, dim=None):
    s = np.asarray(state, dtype=np.float64).ravel()
    if dim is not None and s.size != dim:
        raise ValueError(f"state has {s.size} features, agent expects {dim}")
    return s


class _AgentBase:
    """Shared bookkeeping: buffer, step counter, schedule, update cadence."""

    def __init__(
        self,
        hidden_dim,
        ridge,
        forgetting,
        gamma,
        update_period,
        explore_start,
        explore_floor,
        explore_decay,
        action_low,
        action_high,
        random_state,
    ):
        self.hidden_dim = hidden_dim
        self.ridge = ridge
        self.forgetting = forgetting
        self.gamma = gamma
        self.update_period = update_period
        self.explore_start = explore_start
        self.explore_floor = explore_floor
        self.explore_decay = explore_decay
        self.action_low = action_low
        self.action_high = action_high
        self.random_state = random_state
        self.buffer_ = ReplayBuffer()
        self.t_ = 0
        self.n_updates_ = 0
        self.state_dim_ = None
        self._rng = check_rng(random_state)

    @property
    def initialized_(self):
        return self.state_dim_ is not None

    def _clip_action(self, a):
        return np.clip(a, self.action_low, self.action_high)

    def exploration_scale(self):
        """Current exploration magnitude on the annealed schedule."""
        return exp_schedule(self.t_, self.explore_start, self.explore_floor,
                            self.explore_decay)

    def observe(self, state, action, reward, next_state=None):
        """Store one transition; train once every ``update_period`` calls.

        With gamma > 0 and a next state present, the stored reward is
        bootstrapped with the current value estimate of the next state.
        """
        if not self.initialized_:
            self.init_params(_as_state(state).size)
        s = _as_state(state, self.state_dim_)
        target = float(reward)
        if float(self.gamma) != 0.0 and next_state is not None:
            s_next = _as_state(next_state, self.state_dim_)
            target += float(self.gamma) * self._bootstrap_value(s_next)
        self.buffer_.add(s, action, target, next_state)
        self.t_ += 1
        if self.t_ % int(self.update_period) == 0 and len(self.buffer_) > 0:
            self._update()
            self.buffer_.clear()


class OsQNetAgent(_AgentBase):
    """Discrete-ratio agent: sequential-ELM Q function over a fixed grid.

    The network maps a (state, action) row to a scalar score, so selecting
    an action walks the grid and runs one forward pass per candidate.
    Exploration is epsilon-greedy with an exponentially annealed epsilon;
    argmax ties resolve to the smallest ratio.

    Parameters
    ----------
    actions : sequence of float or None
        Candidate ratios, kept sorted; defaults to 0.1 .. 1.0 step 0.1.
    gamma : float
        Discount on the bootstrapped next-state value; 0 trains on the
        immediate reward alone.
    """

    def __init__(
        self,
        actions=None,
        hidden_dim=400,
        ridge=1e-3,
        forgetting=1.0,
        gamma=0.0,
        update_period=10,
        explore_start=1.0,
        explore_floor=0.01,
        explore_decay=2000.0,
        action_low=0.01,
        action_high=1.0,
        random_state=None,
    ):
        super().__init__(
            hidden_dim, ridge, forgetting, gamma, update_period,
            explore_start, explore_floor, explore_decay,
            action_low, action_high, random_state,
        )
        if actions is None:
            actions = [round(0.1 * i, 10) for i in range(1, 11)]
        acts = np.sort(np.asarray(actions, dtype=np.float64))
        if acts.size == 0:
            raise ValueError("action grid is empty")
        if np.unique(acts).size != acts.size:
            raise ValueError("action grid has duplicate entries")
        if acts.min() <= 0.0 or acts.max() > 1.0:
            raise ValueError("action grid entries must lie in (0, 1]")
        self.actions_ = acts

    def init_params(self, state_dim):
        """Draw the Q-network layer for ``state_dim`` state features."""
        self.state_dim_ = int(state_dim)
        self.qnet_ = OselmRegressor(
            hidden_dim=self.hidden_dim,
            ridge=self.ridge,
            forgetting=self.forgetting,
            activation="sigmoid",
        )
        self.qnet_.init_random(
            self.state_dim_ + 1, 1, rng=self._rng,
            output_scale=1.0 / float(self.hidden_dim),
        )
        return self

    def q_value(self, state, action):
        """Scalar score of one (state, action) pair."""
        s = _as_state(state, self.state_dim_)
        a = np.atleast_1d(np.asarray(action, dtype=np.float64)).ravel()
        row = np.concatenate([s, a])[None, :]
        return float(self.qnet_.predict(row)[0])

    def q_values(self, state):
        """Scores of every grid action, one forward pass per candidate."""
        return np.array([self.q_value(state, a) for a in self.actions_])

    def greedy_action(self, state):
        q = self.q_values(state)
        return float(self.actions_[int(np.argmax(q))])

    def select(self, state, explore=True):
        """Pick a grid ratio; epsilon-greedy only when ``explore``."""
        if not self.initialized_:
            self.init_params(_as_state(state).size)
        if explore and self._rng.uniform() < self.exploration_scale():
            return float(self.actions_[self._rng.integers(self.actions_.size)])
        return self.greedy_action(state)

    def predict(self, states):
        """Greedy ratios for a batch of states, no exploration."""
        states = np.atleast_2d(np.asarray(states, dtype=np.float64))
        if not self.initialized_:
            self.init_params(states.shape[1])
        return np.array([self.greedy_action(s) for s in states])

    def _bootstrap_value(self, s_next):
        return float(np.max(self.q_values(s_next)))

    def _update(self):
        rows = [np.concatenate([s, a[:1]]) for s, a, _, _ in self.buffer_.items()]
        targets = [r for _, _, r, _ in self.buffer_.items()]
        X = np.vstack(rows)
        y = np.asarray(targets)
        if self.qnet_.initialized_:
            self.qnet_.partial_fit(X, y)
        else:
            self.qnet_.fit(X, y)
        self.n_updates_ += 1

    def to_checkpoint(self):
        if not self.initialized_:
            raise ValueError("agent has no parameters yet; nothing to checkpoint")
        return {
            "kind": "qnet_agent",
            "actions": self.actions_.tolist(),
            "gamma": float(self.gamma),
            "update_period": int(self.update_period),
            "explore_start": float(self.explore_start),
            "explore_floor": float(self.explore_floor),
            "explore_decay": float(self.explore_decay),
            "action_low": float(self.action_low),
            "action_high": float(self.action_high),
            "t": int(self.t_),
            "n_updates": int(self.n_updates_),
            "state_dim": int(self.state_dim_),
            "qnet": self.qnet_.to_checkpoint(),
        }

    @classmethod
    def from_checkpoint(cls, payload):
        if payload.get("kind") != "qnet_agent":
            raise ValueError(f"not a qnet agent checkpoint: kind={payload.get('kind')!r}")
        agent = cls(
            actions=payload["actions"],
            hidden_dim=payload["qnet"]["hidden_dim"],
            ridge=payload["qnet"]["ridge"],
            forgetting=payload["qnet"]["forgetting"],
            gamma=payload["gamma"],
            update_period=payload["update_period"],
            explore_start=payload["explore_start"],
            explore_floor=payload["explore_floor"],
            explore_decay=payload["explore_decay"],
            action_low=payload["action_low"],
            action_high=payload["action_high"],
        )
        agent.state_dim_ = int(payload["state_dim"])
        agent.qnet_ = OselmRegressor.from_checkpoint(payload["qnet"])
        agent.t_ = int(payload["t"])
        agent.n_updates_ = int(payload["n_updates"])
        return agent


class AcOselmAgent(_AgentBase):
    """Continuous-ratio actor-critic agent.

    The actor is a single random-layer network with a sigmoid output that
    maps a state into (0, 1); only its output weights train. The critic is
    a sequential ELM over (state, action) rows with a linear output. Every
    update first fits the critic to the buffered targets, then moves the
    actor output weights along the critic's gradient in its action inputs,
    chained through the actor's output nonlinearity and averaged over the
    buffer.

    Exploration adds zero-mean Gaussian noise with an exponentially
    annealed scale to the actor output; actions are clamped to
    [action_low, action_high].

    Parameters
    ----------
    hidden_dim, actor_hidden_dim : int
        Critic and actor hidden widths.
    actor_lr : float
        Step size of the actor ascent.
    action_dim : int
        Action vector length; the ratio policy uses 1.
    """

    def __init__(
        self,
        hidden_dim=400,
        actor_hidden_dim=400,
        actor_lr=0.05,
        action_dim=1,
        ridge=1e-3,
        forgetting=1.0,
        gamma=0.0,
        update_period=10,
        explore_start=0.3,
        explore_floor=0.01,
        explore_decay=2000.0,
        action_low=0.01,
        action_high=1.0,
        random_state=None,
    ):
        super().__init__(
            hidden_dim, ridge, forgetting, gamma, update_period,
            explore_start, explore_floor, explore_decay,
            action_low, action_high, random_state,
        )
        self.actor_hidden_dim = actor_hidden_dim
        self.actor_lr = actor_lr
        self.action_dim = action_dim

    def init_params(self, state_dim):
        """Draw actor layer, actor output weights and the critic network.

        Hidden weights and biases are uniform on [0, 1] and frozen; output
        weights start uniform scaled down by the hidden width so the first
        forward passes sit in the responsive range of the sigmoids.
        """
        self.state_dim_ = int(state_dim)
        d, m_a, k = self.state_dim_, int(self.actor_hidden_dim), int(self.action_dim)
        self.actor_alpha_ = self._rng.uniform(0.0, 1.0, size=(d, m_a))
        self.actor_b_ = self._rng.uniform(0.0, 1.0, size=m_a)
        self.actor_beta_ = self._rng.uniform(0.0, 1.0, size=(m_a, k)) / m_a
        self.critic_ = OselmRegressor(
            hidden_dim=self.hidden_dim,
            ridge=self.ridge,
            forgetting=self.forgetting,
            activation="sigmoid",
        )
        self.critic_.init_random(
            d + k, 1, rng=self._rng, output_scale=1.0 / float(self.hidden_dim),
        )
        return self

    def _actor_hidden(self, state):
        return sigmoid(state @ self.actor_alpha_ + self.actor_b_)

    def actor_forward(self, state):
        """Deterministic policy output mu(state), an action_dim vector."""
        s = _as_state(state, self.state_dim_)
        return sigmoid(self._actor_hidden(s) @ self.actor_beta_)

    def critic_forward(self, state, action):
        """Critic score of one (state, action) pair."""
        s = _as_state(state, self.state_dim_)
        a = np.atleast_1d(np.asarray(action, dtype=np.float64)).ravel()
        row = np.concatenate([s, a])[None, :]
        return float(self.critic_.predict(row)[0])

    def dpg_gradient(self, state):
        """Gradient of the critic score in the actor output weights.

        Evaluated at the policy action a = mu(state) with the critic and
        the actor's frozen layers held fixed: the critic's gradient in its
        action inputs (its output weights times the hidden sigmoid slopes,
        pushed through the action rows of its input weights) chains
        through the actor's output sigmoid and hidden activations. Shape
        matches the actor output weight matrix.
        """
        s = _as_state(state, self.state_dim_)
        d, k = self.state_dim_, int(self.action_dim)
        h_a = self._actor_hidden(s)
        z_a = h_a @ self.actor_beta_
        mu = sigmoid(z_a)
        z_c = np.concatenate([s, mu]) @ self.critic_.alpha_ + self.critic_.b_
        dq_dhidden = sigmoid_grad(z_c) * self.critic_.beta_[:, 0]
        dq_da = dq_dhidden @ self.critic_.alpha_[d:d + k, :].T
        return np.outer(h_a, sigmoid_grad(z_a) * dq_da)

    def select(self, state, explore=True):
        """Policy action, plus annealed Gaussian noise when ``explore``."""
        if not self.initialized_:
            self.init_params(_as_state(state).size)
        mu = self.actor_forward(state)
        if explore:
            mu = mu + self._rng.normal(0.0, self.exploration_scale(), size=mu.shape)
        a = self._clip_action(mu)
        return float(a[0]) if self.action_dim == 1 else a

    def predict(self, states):
        """Clamped policy actions for a batch of states, no noise."""
        states = np.atleast_2d(np.asarray(states, dtype=np.float64))
        if not self.initialized_:
            self.init_params(states.shape[1])
        out = np.array([self._clip_action(self.actor_forward(s)) for s in states])
        return out[:, 0] if self.action_dim == 1 else out

    def _bootstrap_value(self, s_next):
        return self.critic_forward(s_next, self.actor_forward(s_next))

    def _update(self):
        items = self.buffer_.items()
        X = np.vstack([np.concatenate([s, a]) for s, a, _, _ in items])
        y = np.asarray([r for _, _, r, _ in items])
        if self.critic_.initialized_:
            self.critic_.partial_fit(X, y)
        else:
            self.critic_.fit(X, y)
        grad = np.zeros_like(self.actor_beta_)
        for s, _, _, _ in items:
            grad += self.dpg_gradient(s)
        grad /= len(items)
        self.actor_beta_ = self.actor_beta_ + float(self.actor_lr) * grad
        self.n_updates_ += 1

    def to_checkpoint(self):
        if not self.initialized_:
            raise ValueError("agent has no parameters yet; nothing to checkpoint")
        return {
            "kind": "ac_agent",
            "actor_hidden_dim": int(self.actor_hidden_dim),
            "actor_lr": float(self.actor_lr),
            "action_dim": int(self.action_dim),
            "gamma": float(self.gamma),
            "update_period": int(self.update_period),
            "explore_start": float(self.explore_start),
            "explore_floor": float(self.explore_floor),
            "explore_decay": float(self.explore_decay),
            "action_low": float(self.action_low),
            "action_high": float(self.action_high),
            "t": int(self.t_),
            "n_updates": int(self.n_updates_),
            "state_dim": int(self.state_dim_),
            "actor_alpha": _mat_payload(self.actor_alpha_),
            "actor_b": _mat_payload(self.actor_b_),
            "actor_beta": _mat_payload(self.actor_beta_),
            "critic": self.critic_.to_checkpoint(),
        }

    @classmethod
    def from_checkpoint(cls, payload):
        if payload.get("kind") != "ac_agent":
            raise ValueError(f"not an ac agent checkpoint: kind={payload.get('kind')!r}")
        agent = cls(
            hidden_dim=payload["critic"]["hidden_dim"],
            actor_hidden_dim=payload["actor_hidden_dim"],
            actor_lr=payload["actor_lr"],
            action_dim=payload["action_dim"],
            ridge=payload["critic"]["ridge"],
            forgetting=payload["critic"]["forgetting"],
            gamma=payload["gamma"],
            update_period=payload["update_period"],
            explore_start=payload["explore_start"],
            explore_floor=payload["explore_floor"],
            explore_decay=payload["explore_decay"],
            action_low=payload["action_low"],
            action_high=payload["action_high"],
        )
        agent.state_dim_ = int(payload["state_dim"])
        agent.actor_alpha_ = _mat_from_payload(payload["actor_alpha"])
        agent.actor_b_ = _mat_from_payload(payload["actor_b"]).ravel()
        agent.actor_beta_ = _mat_from_payload(payload["actor_beta"])
        agent.critic_ = OselmRegressor.from_checkpoint(payload["critic"])
        agent.t_ = int(payload["t"])
        agent.n_updates_ = int(payload["n_updates"])
        return agent
