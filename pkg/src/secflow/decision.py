"""Adaptation decision engine: trigger check, candidate-set intersection,
cost ranking (or delegated policy prediction), backup-service resolution, and
application of tenant- and middleware-level actions to a running instance."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .datagen import DatasetKind
from .model import (
    ACTION_ORDER,
    ActionKind,
    ActionParams,
    AttackSpec,
    AttackType,
    BackupParams,
    MIDDLEWARE_KINDS,
    MultiCloud,
    OverheadConfig,
    Service,
    Severity,
    Task,
    TenantConfig,
    builtin_action_properties,
)
from .scheduling import TrustRepository, eligible_services
from .scoring import adaptation_cost, attack_score, mitigation_score, normalize

#: AFR multiplier applied to the attacked service by a reconfiguration action.
RECONFIG_AFR_FACTOR = 0.5


class NoBackupError(RuntimeError):
    """No alternative service is available to price Rework/Redundancy."""


@dataclass(frozen=True)
class AttackEvent:
    """A concrete detected attack occurrence on a bound task."""

    attack_type: AttackType
    level: Severity
    l: float  # numeric severity in (0,1]
    detected_in: DatasetKind
    task_id: str
    service_id: str


@dataclass(frozen=True)
class CostBreakdown:
    kind: ActionKind
    price: float
    time: float
    mitigation: float
    value: float
    price_norm: float
    time_norm: float
    mitigation_norm: float
    value_norm: float
    total: float
    params: ActionParams


class DecisionLevel(enum.Enum):
    TENANT = "tenant"
    MIDDLEWARE = "middleware"


@dataclass(frozen=True)
class AdaptationDecision:
    kind: ActionKind
    params: ActionParams
    level: DecisionLevel
    breakdowns: tuple  # audit trail over the whole candidate set
    trigger_score: float
    backup: Service | None = None


class SelectionStatus(enum.Enum):
    NOT_TRIGGERED = "not-triggered"
    SELECTED = "selected"
    UNMITIGABLE = "unmitigable"


@dataclass(frozen=True)
class SelectionResult:
    status: SelectionStatus
    trigger_score: float
    decision: AdaptationDecision | None = None
    breakdowns: tuple = ()


def find_backup_service(
    task: Task,
    current: Service,
    cloud: MultiCloud,
    event: AttackEvent,
    trust: TrustRepository,
) -> Service:
    """Cheapest eligible alternative to the attacked service. A violation seen
    in the cloud log file implicates the provider, so the whole current
    provider is excluded; network-side detections allow sibling services.
    Ties break on the lexicographically smallest id."""
    pool = [s for s in eligible_services(task, cloud) if s.id != current.id]
    if event.detected_in is DatasetKind.CLF:
        pool = [s for s in pool if s.provider_id != current.provider_id]
    if not pool:
        raise NoBackupError(
            f"no backup service for task {task.id!r} (current {current.id!r})"
        )
    return min(pool, key=lambda s: (s.price, s.id))


def candidate_params(
    kind: ActionKind,
    task: Task,
    service: Service,
    overheads: OverheadConfig,
    backup: Service | None,
) -> ActionParams:
    """Resolve a candidate's price/time/MI/value: explicit modeling-time params
    for tenant kinds when present, else the built-in catalog row instantiated
    against the bound service."""
    explicit = task.feasible_actions.get(kind)
    if explicit is not None:
        return explicit
    backup_params = None
    if backup is not None:
        backup_params = BackupParams(time=backup.response_time, price=backup.price)
    return builtin_action_properties(
        kind,
        task_time=service.response_time,
        task_price=service.price,
        task_value=task.value,
        overheads=overheads,
        backup=backup_params,
    )


def select_action(
    task: Task,
    event: AttackEvent,
    spec: AttackSpec,
    cfg: TenantConfig,
    cloud: MultiCloud,
    trust: TrustRepository,
    current: Service,
    overheads: OverheadConfig = OverheadConfig(),
    chooser=None,
) -> SelectionResult:
    """Run the selection algorithm for one detected attack.

    Below the tenant's trigger threshold, nothing happens. Otherwise the
    candidate set is the intersection of the severity tier's mitigation
    actions with the task's feasible actions (Rework/Redundancy drop out when
    no backup resolves). With no `chooser`, the lowest adaptation cost wins
    (ties: higher mitigation score, then declaration order); an adaptive
    policy passes `chooser(breakdowns) -> ActionKind` instead.
    """
    afr = trust.afr(event.service_id, event.attack_type)
    score = attack_score(task.requirements, spec.impact, afr, event.l)
    if score <= cfg.adapt_trigger_threshold:
        return SelectionResult(SelectionStatus.NOT_TRIGGERED, score)

    allowed = spec.mitigation_actions[event.level] & set(task.feasible_actions)
    final = [k for k in ACTION_ORDER if k in allowed]

    backup = None
    if ActionKind.REWORK in final or ActionKind.REDUNDANCY in final:
        try:
            backup = find_backup_service(task, current, cloud, event, trust)
        except NoBackupError:
            final = [
                k for k in final if k not in (ActionKind.REWORK, ActionKind.REDUNDANCY)
            ]
    if not final:
        return SelectionResult(SelectionStatus.UNMITIGABLE, score)

    params = {k: candidate_params(k, task, current, overheads, backup) for k in final}
    ms = {
        k: mitigation_score(task.requirements, spec.impact, p.mitigation_impact)
        for k, p in params.items()
    }
    price_n = normalize({k: params[k].price for k in final})
    time_n = normalize({k: params[k].time for k in final})
    ms_n = normalize(ms)
    value_n = normalize({k: params[k].value for k in final})
    breakdowns = tuple(
        CostBreakdown(
            kind=k,
            price=params[k].price,
            time=params[k].time,
            mitigation=ms[k],
            value=params[k].value,
            price_norm=price_n[k],
            time_norm=time_n[k],
            mitigation_norm=ms_n[k],
            value_norm=value_n[k],
            total=adaptation_cost(cfg, price_n[k], time_n[k], ms_n[k], value_n[k]),
            params=params[k],
        )
        for k in final
    )

    if chooser is None:
        chosen = min(
            breakdowns,
            key=lambda b: (b.total, -b.mitigation, ACTION_ORDER.index(b.kind)),
        ).kind
    else:
        chosen = chooser(breakdowns)
        if chosen not in final:
            raise ValueError(f"chooser returned {chosen!r} outside the candidate set")
    level = (
        DecisionLevel.MIDDLEWARE if chosen in MIDDLEWARE_KINDS else DecisionLevel.TENANT
    )
    decision = AdaptationDecision(
        kind=chosen,
        params=params[chosen],
        level=level,
        breakdowns=breakdowns,
        trigger_score=score,
        backup=backup if chosen in (ActionKind.REWORK, ActionKind.REDUNDANCY) else None,
    )
    return SelectionResult(SelectionStatus.SELECTED, score, decision, breakdowns)


def apply_tenant_action(state, event: AttackEvent, decision: AdaptationDecision):
    """Apply Skip/Switch/Insert to the execution state.

    Skip zeroes the task's contribution and flags data-dependent successors as
    degraded. Switch charges the re-sequencing overhead in place (time and
    value deltas). Insert appends a synthetic mitigation task's params."""
    assert decision.level is DecisionLevel.TENANT
    kind = decision.kind
    task_id = event.task_id
    mitigation = state.mitigation_of(event, decision)
    if kind is ActionKind.SKIP:
        state.skip_task(task_id)
        state.add_adaptation(task_id, kind, price=0.0, time=0.0, value_delta=0.0,
                             mitigation=mitigation, noisy=False)
        return
    if kind is ActionKind.SWITCH:
        base_value = state.base_value(task_id)
        state.add_adaptation(
            task_id,
            kind,
            price=0.0,
            time=decision.params.time,
            value_delta=decision.params.value - base_value,
            mitigation=mitigation,
        )
        return
    if kind is ActionKind.INSERT:
        state.add_adaptation(
            task_id,
            kind,
            price=decision.params.price,
            time=decision.params.time,
            value_delta=decision.params.value,
            mitigation=mitigation,
        )
        return
    raise ValueError(f"not a tenant action: {kind!r}")


def apply_middleware_action(
    state, event: AttackEvent, decision: AdaptationDecision, trust: TrustRepository
):
    """Apply Rework/Redundancy/Reconfiguration and record the violation
    against the original service's trust."""
    assert decision.level is DecisionLevel.MIDDLEWARE
    kind = decision.kind
    task_id = event.task_id
    mitigation = state.mitigation_of(event, decision)
    if kind is ActionKind.REWORK:
        if decision.backup is None:
            raise NoBackupError(f"rework on {task_id!r} lost its backup service")
        time = decision.backup.response_time * state.late_multiplier()
        state.add_adaptation(
            task_id, kind,
            price=decision.backup.price, time=time, value_delta=0.0,
            mitigation=mitigation,
        )
    elif kind is ActionKind.REDUNDANCY:
        if decision.backup is None:
            raise NoBackupError(f"redundancy on {task_id!r} lost its backup service")
        base_time = state.base_time(task_id)
        base_value = state.base_value(task_id)
        state.add_adaptation(
            task_id, kind,
            price=decision.backup.price,
            time=max(decision.backup.response_time, base_time) - base_time,
            value_delta=decision.params.value - base_value,
            mitigation=mitigation,
        )
    elif kind is ActionKind.RECONFIGURATION:
        base_price = state.base_price(task_id)
        base_time = state.base_time(task_id)
        base_value = state.base_value(task_id)
        state.add_adaptation(
            task_id, kind,
            price=decision.params.price - base_price,
            time=decision.params.time - base_time,
            value_delta=decision.params.value - base_value,
            mitigation=mitigation,
        )
        trust.scale_afr(event.service_id, event.attack_type, RECONFIG_AFR_FACTOR)
    else:
        raise ValueError(f"not a middleware action: {kind!r}")
    trust.update(event.service_id, event.attack_type, detected=True)
