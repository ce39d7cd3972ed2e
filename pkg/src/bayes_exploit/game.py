"""One-shot imperfect-information games.

The opponent (player 1) draws a private state ``i ~ pi``, takes a public
action ``j`` with probability ``q[i, j]``, and we (player 2) answer with an
action ``k`` chosen after seeing ``j`` only. Payoffs are stored to us.

Strategies are plain arrays:

* opponent strategy ``q``: shape ``(n_states, n_opp_actions)``, row-stochastic
* our strategy ``r``: shape ``(n_opp_actions, n_our_actions)``, row-stochastic
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

ROW_TOL = 1e-12


def check_stochastic(mat, name="strategy", tol=ROW_TOL) -> np.ndarray:
    """Return ``mat`` as a float array after checking it is row-stochastic."""
    arr = np.asarray(mat, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if np.any(arr < 0.0) or np.any(arr > 1.0 + tol) or not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has entries outside [0, 1]")
    if np.any(np.abs(arr.sum(axis=1) - 1.0) > tol):
        raise ValueError(f"{name} rows must sum to 1")
    return arr


def check_distribution(pi, tol=ROW_TOL) -> np.ndarray:
    arr = np.asarray(pi, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("pi must be a non-empty 1-D vector")
    if np.any(arr < 0.0) or not np.all(np.isfinite(arr)):
        raise ValueError("pi entries must be finite and non-negative")
    if abs(arr.sum() - 1.0) > tol:
        raise ValueError(f"pi must sum to 1 (got {arr.sum()!r})")
    return arr


@dataclass(frozen=True)
class GameSpec:
    """A one-shot game with a hidden opponent state.

    ``payoff[i, j, k]`` is our payoff when the opponent holds state ``i``,
    plays ``j`` and we answer ``k``.
    """

    pi: np.ndarray
    payoff: np.ndarray
    state_labels: tuple[str, ...] = ()
    opp_action_labels: tuple[str, ...] = ()
    our_action_labels: tuple[str, ...] = ()
    name: str = "game"
    max_abs_payoff: float = field(init=False)

    def __post_init__(self):
        pi = check_distribution(self.pi)
        payoff = np.asarray(self.payoff, dtype=float)
        if payoff.ndim != 3 or payoff.shape[0] != pi.size:
            raise ValueError(
                f"payoff must have shape (n_states, n_opp_actions, n_our_actions); "
                f"got {payoff.shape} for {pi.size} states"
            )
        if not np.all(np.isfinite(payoff)):
            raise ValueError("payoff table must be fully populated with finite values")
        pi.setflags(write=False)
        payoff.setflags(write=False)
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "payoff", payoff)
        object.__setattr__(self, "max_abs_payoff", float(np.abs(payoff).max()))
        n, m, k = payoff.shape
        for attr, size in (
            ("state_labels", n),
            ("opp_action_labels", m),
            ("our_action_labels", k),
        ):
            labels = tuple(getattr(self, attr)) or tuple(str(x) for x in range(size))
            if len(labels) != size:
                raise ValueError(f"{attr} has {len(labels)} entries, expected {size}")
            object.__setattr__(self, attr, labels)

    @property
    def n_states(self) -> int:
        return self.payoff.shape[0]

    @property
    def n_opp_actions(self) -> int:
        return self.payoff.shape[1]

    @property
    def n_our_actions_per_obs(self) -> int:
        return self.payoff.shape[2]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "pi": self.pi.tolist(),
            "payoff": self.payoff.tolist(),
            "state_labels": list(self.state_labels),
            "opp_action_labels": list(self.opp_action_labels),
            "our_action_labels": list(self.our_action_labels),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GameSpec":
        return cls(
            pi=np.asarray(data["pi"], dtype=float),
            payoff=np.asarray(data["payoff"], dtype=float),
            state_labels=tuple(data.get("state_labels", ())),
            opp_action_labels=tuple(data.get("opp_action_labels", ())),
            our_action_labels=tuple(data.get("our_action_labels", ())),
            name=data.get("name", "game"),
        )

    def to_json(self, path=None) -> str:
        # repr-precision floats, so numbers round-trip exactly
        text = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_json(cls, source) -> "GameSpec":
        """Load from a JSON string or a path to a JSON file."""
        if isinstance(source, Path) or (
            isinstance(source, str) and not source.lstrip().startswith("{")
        ):
            source = Path(source).read_text()
        return cls.from_dict(json.loads(source))


# Action indices for the motivating game.
KING, JACK = 0, 1
BIG, SMALL = 0, 1
CALL, FOLD = 0, 1


def make_motivating_game() -> GameSpec:
    """K/J versus Q bet-or-fold game; we are the caller holding the queen.

    Player 1 bets $10 (big) or $1 (small) into a $2 pot. Folding loses our
    $1 ante; calling wins or loses ante plus bet depending on the card.
    """
    payoff = np.empty((2, 2, 2))
    for state, sign in ((KING, -1.0), (JACK, 1.0)):
        for action, bet in ((BIG, 10.0), (SMALL, 1.0)):
            payoff[state, action, CALL] = sign * (1.0 + bet)
            payoff[state, action, FOLD] = -1.0
    return GameSpec(
        pi=np.array([0.5, 0.5]),
        payoff=payoff,
        state_labels=("K", "J"),
        opp_action_labels=("b", "s"),
        our_action_labels=("call", "fold"),
        name="motivating",
    )


def motivating_nash_response() -> np.ndarray:
    """Our equilibrium: call a big bet 1/4 of the time, always call a small bet."""
    return np.array([[0.25, 0.75], [1.0, 0.0]])


def motivating_nash_opponent() -> np.ndarray:
    """Opponent equilibrium: always bet big with K, bet big 5/6 with J."""
    return np.array([[1.0, 0.0], [5.0 / 6.0, 1.0 / 6.0]])


def _check_dims(g: GameSpec, ours: np.ndarray, opp: np.ndarray):
    n, m, k = g.payoff.shape
    if opp.shape != (n, m):
        raise ValueError(f"opponent strategy shape {opp.shape} != {(n, m)}")
    if ours.shape != (m, k):
        raise ValueError(f"our strategy shape {ours.shape} != {(m, k)}")


def expected_payoff(g: GameSpec, ours, opp) -> float:
    """Our expected payoff ``sum_i pi_i sum_j q_ij sum_k r_jk u_ijk``."""
    ours = np.asarray(ours, dtype=float)
    opp = np.asarray(opp, dtype=float)
    _check_dims(g, ours, opp)
    return float(np.einsum("i,ij,jk,ijk->", g.pi, opp, ours, g.payoff))


def pure_responses(g: GameSpec):
    """Yield every deterministic strategy of ours as an ``(m, k)`` 0/1 array."""
    m, k = g.n_opp_actions, g.n_our_actions_per_obs
    eye = np.eye(k)
    for choice in np.ndindex(*([k] * m)):
        yield eye[list(choice)]
