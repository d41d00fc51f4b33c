#
# This file is part of BuzzScope.
#
# SPDX-License-Identifier: BSD-2-Clause

import numpy as np


def format_value(v):
    """Text form of a cell: empty for None, repr for floats."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


class DumpVariable:
    def __init__(self, name, values=[], dtype=None):
        self.name   = name
        self.dtype  = dtype
        self.values = np.asarray(values, dtype=dtype) if dtype is not None else list(values)

    def __len__(self):
        return len(self.values)


class Dump:
    def __init__(self):
        self.variables = []

    def add(self, variable):
        self.variables.append(variable)

    def add_columns(self, columns, dtypes={}):
        for name, values in columns.items():
            self.add(DumpVariable(name, values, dtypes.get(name)))

    def get(self, name):
        for variable in self.variables:
            if variable.name == name:
                return variable.values
        raise KeyError(name)

    def columns(self):
        return {v.name: v.values for v in self.variables}

    def __len__(self):
        l = 0
        for variable in self.variables:
            l = max(len(variable), l)
        return l
