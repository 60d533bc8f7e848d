"""Shared fixtures: perturbation bundles are cached per session because they are reused."""

from __future__ import annotations

from functools import lru_cache

import pytest

from graphbreak.perturb import construct_bundle


@lru_cache(maxsize=None)
def cached_bundle(lam: float, n: int, d: int = 1, eps: float = 0.1):
    return construct_bundle(lam, n, eps=eps, d=d)


@pytest.fixture(scope="session")
def bundle_factory():
    return cached_bundle
