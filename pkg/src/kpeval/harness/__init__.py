"""Synthetic fixtures with known answers and brute-force oracles."""

from kpeval.harness.generator import (
    ErrorModel,
    ExpectedValues,
    Fixture,
    JitterKind,
    ScoreModel,
    generate,
    write_fixture,
)
from kpeval.harness.oracles import oracle_ap, oracle_icc, oracle_oks, oracle_spearman
from kpeval.harness.prng import Xorshift128

__all__ = [
    "ErrorModel",
    "ExpectedValues",
    "Fixture",
    "JitterKind",
    "ScoreModel",
    "Xorshift128",
    "generate",
    "oracle_ap",
    "oracle_icc",
    "oracle_oks",
    "oracle_spearman",
    "write_fixture",
]
