"""Trust-aware task-to-service assignment and the provider trust repository."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .model import (
    AttackType,
    MultiCloud,
    SchedulingPlan,
    TenantConfig,
    Workflow,
)
from .scoring import normalize

DEFAULT_EWMA_BETA = 0.1


class UnschedulableError(RuntimeError):
    """No service satisfies a task's security requirements."""


@dataclass
class TrustRepository:
    """Per-service trust scores and the live attack-frequency history.

    Mutated only between workflow instances by a single writer; reads during
    an instance see a frozen snapshot.
    """

    trust: dict = field(default_factory=dict)  # service id -> [0,1]
    afr_history: dict = field(default_factory=dict)  # (service id, AttackType) -> [0,1]

    @classmethod
    def from_cloud(cls, cloud: MultiCloud) -> "TrustRepository":
        """Seed the repository from each service's static AFR vector."""
        repo = cls()
        for s in cloud.services():
            for at in AttackType:
                repo.afr_history[(s.id, at)] = float(s.afr.get(at, 0.0))
            repo._recompute_trust(s.id)
        return repo

    def afr(self, service_id: str, attack_type: AttackType) -> float:
        return self.afr_history[(service_id, attack_type)]

    def _recompute_trust(self, service_id: str):
        rates = [self.afr_history[(service_id, at)] for at in AttackType]
        self.trust[service_id] = min(1.0, max(0.0, 1.0 - sum(rates) / len(rates)))

    def update(
        self,
        service_id: str,
        attack_type: AttackType,
        detected: bool,
        beta: float = DEFAULT_EWMA_BETA,
    ):
        """EWMA update of the per-type rate, then trust = 1 - mean rate."""
        key = (service_id, attack_type)
        if key not in self.afr_history:
            raise KeyError(f"unknown service {service_id!r}")
        old = self.afr_history[key]
        new = (1.0 - beta) * old + beta * (1.0 if detected else 0.0)
        self.afr_history[key] = min(1.0, max(0.0, new))
        self._recompute_trust(service_id)

    def scale_afr(self, service_id: str, attack_type: AttackType, factor: float):
        """Multiplicative AFR adjustment (used by reconfiguration actions)."""
        key = (service_id, attack_type)
        if key not in self.afr_history:
            raise KeyError(f"unknown service {service_id!r}")
        self.afr_history[key] = min(1.0, max(0.0, self.afr_history[key] * factor))
        self._recompute_trust(service_id)

    def to_json(self) -> str:
        afr = {}
        for (sid, at), rate in self.afr_history.items():
            afr.setdefault(sid, {})[at.value] = rate
        return json.dumps({"trust": self.trust, "afr": afr}, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "TrustRepository":
        doc = json.loads(text)
        repo = cls(trust=dict(doc.get("trust", {})))
        for sid, rates in doc.get("afr", {}).items():
            for at_name, rate in rates.items():
                repo.afr_history[(sid, AttackType(at_name))] = float(rate)
        return repo


def eligible_services(task, cloud: MultiCloud):
    """Services whose guarantees dominate the task's CIA requirements."""
    return [s for s in cloud.services() if s.guarantees.dominates(task.requirements)]


def schedule(
    workflow: Workflow,
    cloud: MultiCloud,
    trust: TrustRepository,
    cfg: TenantConfig,
) -> SchedulingPlan:
    """Bind each task to the eligible service minimizing
    w_price*price_norm + w_time*time_norm - w_security*trust(s),
    normalized min-max over the task's eligible set. Ties break on the
    lexicographically smallest service id so plans are deterministic.
    """
    bindings = {}
    for task in workflow.tasks:
        pool = eligible_services(task, cloud)
        if not pool:
            raise UnschedulableError(
                f"no eligible service for task {task.id!r} "
                f"(requires {task.requirements.as_tuple()})"
            )
        price_n = normalize({s.id: s.price for s in pool})
        time_n = normalize({s.id: s.response_time for s in pool})
        if len(pool) == 1:
            # singleton normalization keeps raw values; score is moot anyway
            price_n = {pool[0].id: 0.0}
            time_n = {pool[0].id: 0.0}

        def score(s):
            return (
                cfg.w_price * price_n[s.id]
                + cfg.w_time * time_n[s.id]
                - cfg.w_security * trust.trust.get(s.id, 1.0)
            )

        best = min(pool, key=lambda s: (score(s), s.id))
        bindings[task.id] = best.id
    return SchedulingPlan(bindings=bindings)
