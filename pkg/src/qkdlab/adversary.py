"""Eavesdropping strategies for the entanglement-reuse channel.

Two attacks are modelled.  Intercept-resend measures the travelling key
qudit and forwards the collapsed state; it gains nothing and disturbs
the next round.  The ancilla attack entangles one extra qudit with the
travelling qudit in round one, mirrors the legitimate basis change from
round two on, undoes its own correlation in even rounds to stay
invisible, and in odd rounds deterministically reads off the current
key dit shifted by the (unknown) first one.  A single later announcement
of any odd dit then pins the first dit down, and with it every odd dit
the attacker observed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .register import (
    ANCILLA_WIRE,
    TRANSIT_WIRE,
    PureState,
)

Stage = tuple[str, PureState]


class StrategyOrderError(RuntimeError):
    """An adversary hook was invoked in a round where it is not defined."""


class ScheduleViolationError(RuntimeError):
    """A state reached an adversary hook in a shape the schedule forbids."""


class InconsistencyError(ValueError):
    """Announced dits contradict every surviving hypothesis."""


def observation_sign(round_index: int) -> int:
    """Sign of the unknown-dit offset in an odd extraction round.

    Rounds 3, 7, 11, ... observe (key dit + first dit); rounds 5, 9, 13, ...
    observe (key dit - first dit).
    """
    r = round_index % 4
    if r == 3:
        return 1
    if r == 1 and round_index >= 5:
        return -1
    raise ValueError(f"round {round_index} is not an extraction round")


@dataclass(frozen=True)
class EveObservation:
    """One deterministic transit readout: value = (key dit + sign * first dit) mod d."""

    round_index: int
    value: int
    sign: int

    def __post_init__(self) -> None:
        if self.sign != observation_sign(self.round_index):
            raise ValueError(
                f"sign {self.sign} does not match round {self.round_index}"
            )
        if self.value < 0:
            raise ValueError(f"observed value must be a dit, got {self.value}")


# -- strategy hooks ------------------------------------------------------------


def gao_on_basis_change(state: PureState, round_index: int) -> PureState:
    """Mirror the legitimate basis change on the ancilla (rounds two onward)."""
    if round_index < 2:
        raise StrategyOrderError("the ancilla stays untouched during the first basis change")
    return state.apply_hadamard(ANCILLA_WIRE)


def gao_on_transit(state: PureState, round_index: int) -> tuple[PureState, int | None, list[Stage]]:
    """Act on the travelling qudit according to the round schedule.

    Round one copies the transit value onto the ancilla.  Even rounds add
    the ancilla back onto the transit qudit, which restores the honest
    transit state exactly.  Odd rounds from three on subtract the ancilla,
    read the now-deterministic transit value, and add the ancilla back.
    Returns the resulting state, the observation value if any, and the
    labelled intermediate snapshots for the transcript.
    """
    prefix = gao_stage_prefix(round_index)
    if round_index == 1:
        st = state.apply_controlled_shift(TRANSIT_WIRE, ANCILLA_WIRE, "right")
        return st, None, [(f"{prefix}_2", st)]
    if round_index % 2 == 0:
        st = state.apply_controlled_shift(ANCILLA_WIRE, TRANSIT_WIRE, "right")
        return st, None, [(f"{prefix}_2", st)]
    st = state.apply_controlled_shift(ANCILLA_WIRE, TRANSIT_WIRE, "left")
    stages = [(f"{prefix}_2", st)]
    value = st.deterministic_outcome(TRANSIT_WIRE)
    if value is None:
        raise ScheduleViolationError(
            f"transit qudit not deterministic in extraction round {round_index}"
        )
    st = st.apply_controlled_shift(ANCILLA_WIRE, TRANSIT_WIRE, "right")
    stages.append((f"{prefix}_3", st))
    return st, value, stages


def intercept_resend_on_transit(state: PureState, rng) -> tuple[PureState, int]:
    """Measure the travelling qudit and forward the collapsed state."""
    outcome, collapsed, _ = state.measure_computational(TRANSIT_WIRE, rng)
    return collapsed, outcome


_GAO_PREFIXES = ("Phi", "Psi", "Omega", "Theta", "Upsilon")


def gao_stage_prefix(round_index: int) -> str:
    """Stage-name family for one attacked round; families repeat with period 4."""
    if round_index < 1:
        raise ValueError(f"round index must be positive, got {round_index}")
    if round_index == 1:
        return _GAO_PREFIXES[0]
    return _GAO_PREFIXES[(round_index - 2) % 4 + 1]


# -- strategies ----------------------------------------------------------------


class AdversaryStrategy:
    """Pass-through channel; subclasses override the two hooks.

    on_transit returns the new state, an observation value or None, and
    the labelled snapshots taken while the qudit was in transit.
    """

    kind = "none"
    wants_ancilla = False

    def on_basis_change(self, state: PureState, round_index: int) -> PureState:
        return state

    def on_transit(self, state: PureState, round_index: int, rng) -> tuple[PureState, int | None, list[Stage]]:
        return state, None, [("in_transit", state)]

    def stage_prefix(self, round_index: int) -> str | None:
        return None

    def clone(self) -> AdversaryStrategy:
        return type(self)()


class InterceptResend(AdversaryStrategy):
    """Measure-and-resend on a configurable set of rounds (default: all)."""

    kind = "intercept"

    def __init__(self, attack_rounds=None) -> None:
        self.attack_rounds = None if attack_rounds is None else frozenset(attack_rounds)
        self.observations: list[tuple[int, int]] = []

    def attacks(self, round_index: int) -> bool:
        return self.attack_rounds is None or round_index in self.attack_rounds

    def on_transit(self, state, round_index, rng):
        if not self.attacks(round_index):
            return state, None, [("in_transit", state)]
        collapsed, outcome = intercept_resend_on_transit(state, rng)
        self.observations.append((round_index, outcome))
        return collapsed, outcome, [("in_transit", collapsed)]

    def clone(self) -> InterceptResend:
        return InterceptResend(self.attack_rounds)


class GaoAttack(AdversaryStrategy):
    """Ancilla-entangling attack with detection-free key extraction."""

    kind = "gao"
    wants_ancilla = True

    def __init__(self) -> None:
        self.observations: list[EveObservation] = []

    def on_basis_change(self, state, round_index):
        if round_index == 1:
            return state
        return gao_on_basis_change(state, round_index)

    def on_transit(self, state, round_index, rng):
        state, value, stages = gao_on_transit(state, round_index)
        if value is not None:
            self.observations.append(
                EveObservation(round_index, value, observation_sign(round_index))
            )
        return state, value, stages

    def stage_prefix(self, round_index: int) -> str:
        return gao_stage_prefix(round_index)

    def clone(self) -> GaoAttack:
        return GaoAttack()


# -- inference -----------------------------------------------------------------


@dataclass(frozen=True)
class EveKnowledge:
    """Everything the ancilla attacker holds after a session."""

    dim: int
    observations: tuple[EveObservation, ...]
    q1_candidates: frozenset[int] = field(default=None)  # type: ignore[assignment]
    resolved_q1: int | None = None

    def __post_init__(self):
        if self.q1_candidates is None:
            object.__setattr__(self, "q1_candidates", frozenset(range(self.dim)))
        if not self.q1_candidates:
            raise ValueError("candidate set for the first dit must be non-empty")
        rounds = [o.round_index for o in self.observations]
        if len(set(rounds)) != len(rounds):
            raise ValueError("duplicate observation rounds")
        if any(o.value >= self.dim for o in self.observations):
            raise ValueError("observed value out of dit range")
        if self.resolved_q1 is not None and self.resolved_q1 not in self.q1_candidates:
            raise ValueError("resolved first dit must be among the candidates")

    def hypothesis(self, first_dit: int) -> dict[int, int]:
        """Key dits implied by one candidate value of the first dit."""
        return {
            o.round_index: (o.value - o.sign * first_dit) % self.dim
            for o in self.observations
        }


def infer_keys(
    knowledge: EveKnowledge, announced
) -> tuple[int | None, dict[int, int]]:
    """Resolve the first key dit from announced dits, if possible.

    Each observation r_m = (q_m + sign_m * q_1) leaves d consistent
    hypotheses for q_1.  Any announced odd dit the attacker observed
    (or an announcement of the first dit itself) selects one of them;
    the return value is (resolved first dit or None, every key dit the
    attacker then knows, by round index).
    """
    d = knowledge.dim
    by_round = {o.round_index: o for o in knowledge.observations}
    resolved = knowledge.resolved_q1
    for index, value in announced:
        if index == 1:
            candidate = value % d
        elif index in by_round:
            o = by_round[index]
            candidate = (o.sign * (o.value - value)) % d
        else:
            continue
        if resolved is None:
            resolved = candidate
        elif resolved != candidate:
            raise InconsistencyError(
                f"announced dit at round {index} contradicts every remaining hypothesis"
            )
    if resolved is None:
        return None, {}
    if resolved not in knowledge.q1_candidates:
        raise InconsistencyError(
            f"resolved first dit {resolved} is outside the candidate set"
        )
    known = {1: resolved}
    known.update(knowledge.hypothesis(resolved))
    return resolved, known
