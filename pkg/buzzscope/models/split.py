#
# This file is part of BuzzScope.
#
# SPDX-License-Identifier: BSD-2-Clause

from dataclasses import dataclass

import numpy as np

from buzzscope.errors import ConfigError

MODES = ["chrono-60-20-20", "chrono-80-20", "leave-one-whale-out"]
ROLES = ["train", "val", "test"]

# Types --------------------------------------------------------------------------------------------

@dataclass(frozen=True)
class Part:
    record   : int    # index into the record list
    whale_id : str
    role     : str
    start    : int
    end      : int


@dataclass(frozen=True)
class Fold:
    name  : str
    parts : tuple

    def ranges(self, role):
        return [p for p in self.parts if p.role == role]

    def assign(self, record, starts, size):
        """Role of each unit [start, start + size) of a record; None for units straddling a cut."""
        starts = np.asarray(starts)
        roles  = np.full(len(starts), None, dtype=object)
        for p in self.parts:
            if p.record != record:
                continue
            inside = (starts >= p.start) & (starts + size <= p.end)
            roles[inside] = p.role
        return roles

    def units(self, records, size, stride, role):
        """(record, start) of every unit of `role` on the record's global unit grid."""
        out = []
        for i, record in enumerate(records):
            n      = len(record)
            starts = np.arange(0, n - size + 1, stride) if n >= size else np.zeros(0, dtype=int)
            roles  = self.assign(i, starts, size)
            out   += [(i, int(s)) for s, r in zip(starts, roles) if r == role]
        return out

    def counts(self, records, size, stride):
        counts = {r: 0 for r in ROLES + ["dropped"]}
        for i, record in enumerate(records):
            n      = len(record)
            starts = np.arange(0, n - size + 1, stride) if n >= size else np.zeros(0, dtype=int)
            for r in self.assign(i, starts, size):
                counts["dropped" if r is None else r] += 1
        return counts


@dataclass(frozen=True)
class SplitPlan:
    mode  : str
    folds : tuple

    @property
    def fold(self):
        return self.folds[0]

# Split --------------------------------------------------------------------------------------------

def _chrono(records, cuts):
    parts = []
    for i, record in enumerate(records):
        n      = len(record)
        bounds = [0] + [int(np.floor(c*n)) for c in cuts] + [n]
        for role, start, end in zip(ROLES if len(cuts) == 2 else ["train", "test"], bounds[:-1], bounds[1:]):
            parts.append(Part(i, record.whale_id, role, start, end))
    return parts

def split(records, mode="chrono-60-20-20"):
    if len(records) < 1:
        raise ConfigError("split needs at least one record")
    if mode == "chrono-60-20-20":
        return SplitPlan(mode, (Fold("all", tuple(_chrono(records, [0.6, 0.8]))),))
    if mode == "chrono-80-20":
        return SplitPlan(mode, (Fold("all", tuple(_chrono(records, [0.8]))),))
    if mode == "leave-one-whale-out":
        n = len(records)
        if n < 3:
            raise ConfigError(f"leave-one-whale-out needs at least 3 whales, got {n}")
        folds = []
        for k in range(n):
            parts = []
            for i, record in enumerate(records):
                role = "test" if i == k else "val" if i == (k + 1) % n else "train"
                parts.append(Part(i, record.whale_id, role, 0, len(record)))
            folds.append(Fold(f"test-{records[k].whale_id}", tuple(parts)))
        return SplitPlan(mode, tuple(folds))
    raise ConfigError(f"unknown split mode {mode} (expected one of {', '.join(MODES)})")
