"""Shared builders for small deterministic fixtures used across the suite."""

import numpy as np
import pytest

from secflow.model import (
    ActionKind,
    AttackType,
    MultiCloud,
    SchedulingPlan,
    SecurityVector,
    Service,
    Task,
    TenantConfig,
    Workflow,
)


def make_task(tid="t0", cia=(0.5, 0.5, 0.5), value=1.0, kinds=None):
    if kinds is None:
        kinds = list(ActionKind)
    return Task(
        id=tid,
        requirements=SecurityVector(*cia),
        value=value,
        feasible_actions={k: None for k in kinds},
    )


def make_service(
    sid="p0-s0",
    provider="p0",
    price=2.0,
    time=10.0,
    guarantees=(1.0, 1.0, 1.0),
    afr=0.5,
):
    rates = afr if isinstance(afr, dict) else {at: afr for at in AttackType}
    return Service(
        id=sid,
        provider_id=provider,
        price=price,
        response_time=time,
        guarantees=SecurityVector(*guarantees),
        afr=rates,
    )


def make_cloud(services):
    by_provider = {}
    for s in services:
        by_provider.setdefault(s.provider_id, []).append(s)
    return MultiCloud(
        providers=tuple((pid, tuple(ss)) for pid, ss in by_provider.items())
    )


def make_plan(workflow, service_id):
    return SchedulingPlan(bindings={t.id: service_id for t in workflow.tasks})


@pytest.fixture
def single_task_workflow():
    return Workflow(tasks=(make_task(),), control_edges=(), data_edges=())


@pytest.fixture
def default_tenant():
    return TenantConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
