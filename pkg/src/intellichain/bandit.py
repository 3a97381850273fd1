"""UCB1 bandit over pedagogical strategy directives.

One bandit lives inside each dialogue session; rewards come from the change
in the learner's evaluation score between consecutive turns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import EmptyArmSet, RewardOutOfRange, UnknownArm


@dataclass(frozen=True)
class StrategyArm:
    id: str
    directive_text: str


DEFAULT_ARMS: tuple[StrategyArm, ...] = (
    StrategyArm("hint_first", "Open with a small hint that narrows the search space, then ask the learner to act on it."),
    StrategyArm("question_first", "Lead with a probing question before offering any information."),
    StrategyArm("worked_example_first", "Walk through one step of a parallel worked example, then hand the next step to the learner."),
    StrategyArm("recap_first", "Briefly recap what the learner has established so far, then ask for the next step."),
)


@dataclass
class BanditState:
    arms: tuple[StrategyArm, ...]
    counts: list[int] = field(default_factory=list)
    sums: list[float] = field(default_factory=list)
    total_pulls: int = 0

    def __post_init__(self) -> None:
        ids = [arm.id for arm in self.arms]
        if len(set(ids)) != len(ids):
            raise ValueError("arm ids must be unique")
        if not self.counts:
            self.counts = [0] * len(self.arms)
        if not self.sums:
            self.sums = [0.0] * len(self.arms)

    def arm_index(self, arm_id: str) -> int:
        for i, arm in enumerate(self.arms):
            if arm.id == arm_id:
                return i
        raise UnknownArm(arm_id)

    def arm(self, arm_id: str) -> StrategyArm:
        return self.arms[self.arm_index(arm_id)]


def fresh_bandit(arms: tuple[StrategyArm, ...] = DEFAULT_ARMS) -> BanditState:
    return BanditState(arms=tuple(arms))


def select_arm(state: BanditState) -> str:
    """UCB1 selection: any unpulled arm first (lowest index), else argmax of
    mean + sqrt(2 ln(total) / count), ties to lowest index. Pure read."""
    if not state.arms:
        raise EmptyArmSet("no strategy arms configured")
    for i, count in enumerate(state.counts):
        if count == 0:
            return state.arms[i].id
    best_index = 0
    best_value = -math.inf
    for i, count in enumerate(state.counts):
        value = state.sums[i] / count + math.sqrt(2.0 * math.log(state.total_pulls) / count)
        if value > best_value:
            best_value = value
            best_index = i
    return state.arms[best_index].id


def update(state: BanditState, arm_id: str, reward: float) -> BanditState:
    if not 0.0 <= reward <= 1.0:
        raise RewardOutOfRange(f"reward {reward} outside [0, 1]")
    index = state.arm_index(arm_id)
    state.counts[index] += 1
    state.sums[index] += reward
    state.total_pulls += 1
    return state


def reward_from_signals(previous_score: float, current_score: float) -> float:
    """Score went up -> 1, held -> 0.5, dropped -> 0."""
    if current_score > previous_score:
        return 1.0
    if current_score == previous_score:
        return 0.5
    return 0.0
