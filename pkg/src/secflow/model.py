"""Domain model: workflows, tasks, attacks, services and the built-in catalogs.

All types are immutable after construction and safe to share across threads.
Workflow documents are exchanged as JSON; see ``parse_workflow`` for the schema.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field


class ModelError(ValueError):
    """Base class for model construction/validation failures."""


class ParseError(ModelError):
    """Malformed workflow document; the message names the offending path."""


class ValidationError(ModelError):
    """Structurally well-formed document violating a model invariant."""


def _check_unit(value, name):
    if not (isinstance(value, (int, float)) and 0.0 <= value <= 1.0):
        raise ValidationError(f"{name} must be in [0,1], got {value!r}")
    return float(value)


@dataclass(frozen=True)
class SecurityVector:
    """A (confidentiality, integrity, availability) triple, each in [0,1]."""

    c: float
    i: float
    a: float

    def __post_init__(self):
        _check_unit(self.c, "c")
        _check_unit(self.i, "i")
        _check_unit(self.a, "a")

    def dominates(self, other: "SecurityVector") -> bool:
        """Component-wise >= comparison (e.g. service guarantees vs task needs)."""
        return self.c >= other.c and self.i >= other.i and self.a >= other.a

    def as_tuple(self):
        return (self.c, self.i, self.a)


class ActionKind(enum.Enum):
    SKIP = "skip"
    SWITCH = "switch"
    INSERT = "insert"
    REWORK = "rework"
    REDUNDANCY = "redundancy"
    RECONFIGURATION = "reconfiguration"


TENANT_KINDS = frozenset({ActionKind.SKIP, ActionKind.SWITCH, ActionKind.INSERT})
MIDDLEWARE_KINDS = frozenset(
    {ActionKind.REWORK, ActionKind.REDUNDANCY, ActionKind.RECONFIGURATION}
)

# Stable declaration order used for deterministic tie-breaking everywhere.
ACTION_ORDER = tuple(ActionKind)


class AttackType(enum.Enum):
    DOS = "dos"
    PROBE = "probe"
    U2R = "u2r"
    R2L = "r2l"


class Severity(enum.Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"


SEVERITY_ORDER = (Severity.LOW, Severity.MEDIUM, Severity.HIGH)

#: Numeric severity used multiplicatively in the attack score.
SEVERITY_LEVEL = {Severity.LOW: 1 / 3, Severity.MEDIUM: 2 / 3, Severity.HIGH: 1.0}


@dataclass(frozen=True)
class ActionParams:
    """Price/time/mitigation-impact/value tuple of one adaptation action."""

    price: float
    time: float
    mitigation_impact: SecurityVector
    value: float

    def __post_init__(self):
        for name in ("price", "time", "value"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and v >= 0 and v == v and v != float("inf")):
                raise ValidationError(f"action {name} must be finite and >= 0, got {v!r}")


@dataclass(frozen=True)
class Task:
    id: str
    requirements: SecurityVector
    value: float
    # Tenant-level kinds may carry explicit params fixed at modeling time;
    # middleware-level kinds never do (resolved at runtime from a backup service).
    feasible_actions: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.value < 0:
            raise ValidationError(f"task {self.id}: value must be >= 0")
        for kind, params in self.feasible_actions.items():
            if not isinstance(kind, ActionKind):
                raise ValidationError(f"task {self.id}: unknown action kind {kind!r}")
            if kind in MIDDLEWARE_KINDS and params is not None:
                raise ValidationError(
                    f"task {self.id}: middleware action {kind.value} cannot carry "
                    "static params (resolved at runtime)"
                )


@dataclass(frozen=True)
class ControlEdge:
    src: str
    dst: str
    cond: str = ""
    prob: float = 1.0  # probability the edge is taken when cond is non-empty


@dataclass(frozen=True)
class DataEdge:
    src: str
    dst: str
    data: str = ""


@dataclass(frozen=True)
class Workflow:
    tasks: tuple
    control_edges: tuple
    data_edges: tuple

    def __post_init__(self):
        ids = [t.id for t in self.tasks]
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate task ids")
        known = set(ids)
        for e in self.control_edges + self.data_edges:
            for end in (e.src, e.dst):
                if end not in known:
                    raise ValidationError(f"edge references missing task {end!r}")
        cycle = _find_cycle(ids, self.control_edges)
        if cycle:
            raise ValidationError("cycle in control edges: " + " -> ".join(cycle))
        order = set()
        reach = self._reachability()
        for e in self.data_edges:
            if e.src != e.dst and e.dst not in reach.get(e.src, order):
                raise ValidationError(
                    f"data edge {e.src}->{e.dst} endpoints not connected by a control path"
                )

    def _reachability(self):
        succ = {}
        for e in self.control_edges:
            succ.setdefault(e.src, set()).add(e.dst)
        reach = {}
        for t in reversed(self.topological_order()):
            r = set()
            for s in succ.get(t, ()):
                r.add(s)
                r |= reach.get(s, set())
            reach[t] = r
        return reach

    def task_map(self):
        return {t.id: t for t in self.tasks}

    def topological_order(self):
        """Kahn's algorithm; ties resolved by task declaration order."""
        indeg = {t.id: 0 for t in self.tasks}
        succ = {t.id: [] for t in self.tasks}
        for e in self.control_edges:
            indeg[e.dst] += 1
            succ[e.src].append(e.dst)
        ready = [t.id for t in self.tasks if indeg[t.id] == 0]
        out = []
        while ready:
            n = ready.pop(0)
            out.append(n)
            for m in succ[n]:
                indeg[m] -= 1
                if indeg[m] == 0:
                    ready.append(m)
        return out


def _find_cycle(ids, edges):
    succ = {i: [] for i in ids}
    for e in edges:
        succ[e.src].append(e.dst)
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {i: WHITE for i in ids}
    stack = []

    def visit(n):
        color[n] = GRAY
        stack.append(n)
        for m in succ[n]:
            if color[m] == GRAY:
                return stack[stack.index(m):] + [m]
            if color[m] == WHITE:
                found = visit(m)
                if found:
                    return found
        stack.pop()
        color[n] = BLACK
        return None

    for i in ids:
        if color[i] == WHITE:
            found = visit(i)
            if found:
                return found
    return None


@dataclass(frozen=True)
class AttackSpec:
    attack_type: AttackType
    impact: SecurityVector
    # severity -> frozenset of ActionKind
    mitigation_actions: dict

    def __post_init__(self):
        for sev in SEVERITY_ORDER:
            actions = self.mitigation_actions.get(sev)
            if not actions:
                raise ValidationError(
                    f"{self.attack_type.value}: empty mitigation set for {sev.value}"
                )


@dataclass(frozen=True)
class Service:
    id: str
    provider_id: str
    price: float
    response_time: float
    guarantees: SecurityVector
    afr: dict  # AttackType -> rate in [0,1]

    def __post_init__(self):
        if self.price <= 0:
            raise ValidationError(f"service {self.id}: price must be > 0")
        if self.response_time <= 0:
            raise ValidationError(f"service {self.id}: response_time must be > 0")
        for at, rate in self.afr.items():
            _check_unit(rate, f"service {self.id} afr[{at.value}]")


@dataclass(frozen=True)
class MultiCloud:
    providers: tuple  # of (provider_id, tuple of Service)

    def __post_init__(self):
        seen = set()
        for pid, services in self.providers:
            for s in services:
                if s.id in seen:
                    raise ValidationError(f"duplicate service id {s.id!r}")
                seen.add(s.id)
                if s.provider_id != pid:
                    raise ValidationError(
                        f"service {s.id}: provider_id {s.provider_id!r} != owner {pid!r}"
                    )

    def services(self):
        for _, services in self.providers:
            yield from services

    def service_map(self):
        return {s.id: s for s in self.services()}


@dataclass(frozen=True)
class SchedulingPlan:
    bindings: dict  # task id -> service id

    def validate(self, workflow: Workflow, cloud: MultiCloud):
        services = cloud.service_map()
        for t in workflow.tasks:
            sid = self.bindings.get(t.id)
            if sid is None:
                raise ValidationError(f"task {t.id} unbound in scheduling plan")
            if sid not in services:
                raise ValidationError(f"task {t.id} bound to unknown service {sid!r}")


class Strategy(enum.Enum):
    LOWEST_COST = "lowest-cost"
    ADAPTIVE = "adaptive"


@dataclass(frozen=True)
class TenantConfig:
    w_price: float = 0.25
    w_time: float = 0.25
    w_security: float = 0.25
    w_value: float = 0.25
    adapt_trigger_threshold: float = 0.1
    strategy: Strategy = Strategy.LOWEST_COST

    def __post_init__(self):
        weights = (self.w_price, self.w_time, self.w_security, self.w_value)
        if any(w < 0 for w in weights):
            raise ValidationError("tenant weights must be >= 0")
        if not any(w > 0 for w in weights):
            raise ValidationError("at least one tenant weight must be > 0")
        _check_unit(self.adapt_trigger_threshold, "adapt_trigger_threshold")


# ---------------------------------------------------------------------------
# Built-in catalogs

_ATTACK_ROWS = {
    AttackType.DOS: (
        (0.56, 0.56, 0.56),
        {
            Severity.LOW: {ActionKind.SWITCH, ActionKind.REWORK},
            Severity.MEDIUM: {ActionKind.INSERT, ActionKind.REWORK},
            Severity.HIGH: {
                ActionKind.INSERT,
                ActionKind.REWORK,
                ActionKind.REDUNDANCY,
                ActionKind.RECONFIGURATION,
            },
        },
    ),
    AttackType.PROBE: (
        (0.22, 0.22, 0.0),
        {
            Severity.LOW: {ActionKind.SKIP},
            Severity.MEDIUM: {ActionKind.SKIP, ActionKind.RECONFIGURATION},
            Severity.HIGH: {ActionKind.SKIP, ActionKind.RECONFIGURATION},
        },
    ),
    AttackType.U2R: (
        (0.56, 0.22, 0.22),
        {
            Severity.LOW: {ActionKind.INSERT, ActionKind.REWORK},
            Severity.MEDIUM: {ActionKind.INSERT, ActionKind.REWORK},
            Severity.HIGH: {
                ActionKind.INSERT,
                ActionKind.REWORK,
                ActionKind.REDUNDANCY,
                ActionKind.RECONFIGURATION,
            },
        },
    ),
    AttackType.R2L: (
        (0.56, 0.56, 0.22),
        {
            Severity.LOW: {ActionKind.REWORK},
            Severity.MEDIUM: {ActionKind.INSERT, ActionKind.REWORK},
            Severity.HIGH: {
                ActionKind.INSERT,
                ActionKind.REWORK,
                ActionKind.RECONFIGURATION,
            },
        },
    ),
}

#: Mitigation impact (C, I, A) per adaptation kind.
ACTION_MITIGATION_IMPACT = {
    ActionKind.INSERT: SecurityVector(0.7, 0.9, 0.9),
    ActionKind.SWITCH: SecurityVector(0.7, 0.6, 0.8),
    ActionKind.SKIP: SecurityVector(0.5, 0.4, 0.6),
    ActionKind.REWORK: SecurityVector(0.5, 0.9, 0.7),
    ActionKind.REDUNDANCY: SecurityVector(0.5, 0.8, 0.9),
    ActionKind.RECONFIGURATION: SecurityVector(0.6, 0.7, 0.5),
}


def builtin_attack_catalog():
    """The four built-in attack specifications, keyed by attack type."""
    return {
        at: AttackSpec(
            attack_type=at,
            impact=SecurityVector(*impact),
            mitigation_actions={sev: frozenset(acts) for sev, acts in mas.items()},
        )
        for at, (impact, mas) in _ATTACK_ROWS.items()
    }


@dataclass(frozen=True)
class OverheadConfig:
    """Symbolic overheads of the action-properties catalog, as fractions of the
    violated task's own time/price/value."""

    insert_time_frac: float = 0.2
    insert_price_frac: float = 0.2
    insert_value_frac: float = 0.1
    switch_time_frac: float = 0.1
    switch_value_frac: float = 0.9
    reconfig_time_frac: float = 0.1
    reconfig_price_frac: float = 0.1
    reconfig_value_frac: float = 0.1
    redundancy_value_frac: float = 0.25


@dataclass(frozen=True)
class BackupParams:
    """Price/time of the runtime-resolved backup service (plus optional value
    bonus for redundant execution)."""

    time: float
    price: float
    value_bonus: float | None = None


class MissingBackupError(ModelError):
    """Rework/Redundancy requested without a resolved backup service."""


def builtin_action_properties(
    kind: ActionKind,
    task_time: float,
    task_price: float,
    task_value: float,
    overheads: OverheadConfig = OverheadConfig(),
    backup: BackupParams | None = None,
) -> ActionParams:
    """Instantiate the catalog row for `kind` against a concrete task.

    `task_time`/`task_price` are the bound service's response time and price;
    `task_value` is the task's value. Rework and Redundancy require `backup`.
    """
    mi = ACTION_MITIGATION_IMPACT[kind]
    oh = overheads
    if kind is ActionKind.SKIP:
        return ActionParams(0.0, 0.0, mi, 0.0)
    if kind is ActionKind.INSERT:
        return ActionParams(
            oh.insert_price_frac * task_price,
            oh.insert_time_frac * task_time,
            mi,
            oh.insert_value_frac * task_value,
        )
    if kind is ActionKind.SWITCH:
        return ActionParams(
            task_price,
            oh.switch_time_frac * task_time,
            mi,
            oh.switch_value_frac * task_value,
        )
    if kind is ActionKind.RECONFIGURATION:
        return ActionParams(
            task_price + oh.reconfig_price_frac * task_price,
            task_time + oh.reconfig_time_frac * task_time,
            mi,
            task_value + oh.reconfig_value_frac * task_value,
        )
    if backup is None:
        raise MissingBackupError(f"{kind.value} requires a backup service")
    if kind is ActionKind.REWORK:
        return ActionParams(backup.price, backup.time, mi, task_value)
    if kind is ActionKind.REDUNDANCY:
        bonus = backup.value_bonus
        if bonus is None:
            bonus = oh.redundancy_value_frac * task_value
        return ActionParams(
            task_price + backup.price,
            max(backup.time, task_time),
            mi,
            task_value + bonus,
        )
    raise ModelError(f"unknown action kind {kind!r}")


# ---------------------------------------------------------------------------
# Workflow JSON (de)serialization
#
# {"tasks":[{"id","c","i","a","value",
#            "actions":[{"kind","price","time","mi":[c,i,a],"value"}]}],
#  "control_edges":[{"from","to","cond","prob"}],
#  "data_edges":[{"from","to","data"}]}
#
# Tenant-level action entries may carry explicit params; when omitted they are
# instantiated at decision time from the built-in catalog. Middleware-level
# entries must not carry price/time.


def parse_workflow(document: str) -> Workflow:
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at offset {exc.pos}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ParseError("$: document must be an object")
    tasks = []
    for idx, td in enumerate(doc.get("tasks", [])):
        path = f"$.tasks[{idx}]"
        try:
            actions = {}
            for aidx, ad in enumerate(td.get("actions", [])):
                apath = f"{path}.actions[{aidx}]"
                try:
                    kind = ActionKind(ad["kind"])
                except (KeyError, ValueError):
                    raise ValidationError(
                        f"{apath}: unknown action kind {ad.get('kind')!r}"
                    ) from None
                if kind in MIDDLEWARE_KINDS:
                    if any(k in ad for k in ("price", "time")):
                        raise ValidationError(
                            f"{apath}: middleware action cannot carry static price/time"
                        )
                    actions[kind] = None
                elif "price" in ad:
                    actions[kind] = ActionParams(
                        price=float(ad["price"]),
                        time=float(ad["time"]),
                        mitigation_impact=SecurityVector(*ad["mi"])
                        if "mi" in ad
                        else ACTION_MITIGATION_IMPACT[kind],
                        value=float(ad["value"]),
                    )
                else:
                    actions[kind] = None
            tasks.append(
                Task(
                    id=str(td["id"]),
                    requirements=SecurityVector(td["c"], td["i"], td["a"]),
                    value=float(td["value"]),
                    feasible_actions=actions,
                )
            )
        except KeyError as exc:
            raise ParseError(f"{path}: missing field {exc.args[0]!r}") from None
    control = tuple(
        ControlEdge(
            src=str(e["from"]),
            dst=str(e["to"]),
            cond=str(e.get("cond", "")),
            prob=float(e.get("prob", 1.0 if not e.get("cond") else 0.5)),
        )
        for e in doc.get("control_edges", [])
    )
    data = tuple(
        DataEdge(src=str(e["from"]), dst=str(e["to"]), data=str(e.get("data", "")))
        for e in doc.get("data_edges", [])
    )
    return Workflow(tasks=tuple(tasks), control_edges=control, data_edges=data)


def serialize_workflow(workflow: Workflow) -> str:
    doc = {
        "tasks": [
            {
                "id": t.id,
                "c": t.requirements.c,
                "i": t.requirements.i,
                "a": t.requirements.a,
                "value": t.value,
                "actions": [
                    (
                        {"kind": kind.value}
                        if params is None
                        else {
                            "kind": kind.value,
                            "price": params.price,
                            "time": params.time,
                            "mi": list(params.mitigation_impact.as_tuple()),
                            "value": params.value,
                        }
                    )
                    for kind, params in sorted(
                        t.feasible_actions.items(), key=lambda kv: ACTION_ORDER.index(kv[0])
                    )
                ],
            }
            for t in workflow.tasks
        ],
        "control_edges": [
            {"from": e.src, "to": e.dst, "cond": e.cond, "prob": e.prob}
            for e in workflow.control_edges
        ],
        "data_edges": [
            {"from": e.src, "to": e.dst, "data": e.data} for e in workflow.data_edges
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def parse_multicloud(document: str) -> MultiCloud:
    """MultiCloud JSON: {"providers":[{"id","services":[{"id","price","time",
    "c","i","a","afr":{"dos":..,"probe":..,"u2r":..,"r2l":..}}]}]}."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at offset {exc.pos}: {exc.msg}") from exc
    providers = []
    for pd in doc.get("providers", []):
        pid = str(pd["id"])
        services = tuple(
            Service(
                id=str(sd["id"]),
                provider_id=pid,
                price=float(sd["price"]),
                response_time=float(sd["time"]),
                guarantees=SecurityVector(sd["c"], sd["i"], sd["a"]),
                afr={AttackType(k): float(v) for k, v in sd.get("afr", {}).items()},
            )
            for sd in pd.get("services", [])
        )
        providers.append((pid, services))
    return MultiCloud(providers=tuple(providers))


def serialize_multicloud(cloud: MultiCloud) -> str:
    doc = {
        "providers": [
            {
                "id": pid,
                "services": [
                    {
                        "id": s.id,
                        "price": s.price,
                        "time": s.response_time,
                        "c": s.guarantees.c,
                        "i": s.guarantees.i,
                        "a": s.guarantees.a,
                        "afr": {at.value: rate for at, rate in sorted(
                            s.afr.items(), key=lambda kv: kv[0].value)},
                    }
                    for s in services
                ],
            }
            for pid, services in cloud.providers
        ]
    }
    return json.dumps(doc, indent=2, sort_keys=True)
