#
# This file is part of BuzzScope.
#
# SPDX-License-Identifier: BSD-2-Clause

import json

import numpy as np

from buzzscope.software.dump.common import Dump, DumpVariable


def _plain(v):
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_plain(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


class JSONDump(Dump):
    def __init__(self, dump=None, data=None):
        Dump.__init__(self)
        self.variables = [] if dump is None else dump.variables
        self.data      = data

    def generate_data(self):
        if self.data is not None:
            return _plain(self.data)
        return {v.name: _plain(v.values) for v in self.variables}

    def write(self, filename):
        with open(filename, "w") as f:
            json.dump(self.generate_data(), f, indent=2, sort_keys=True)
            f.write("\n")

    def read(self, filename):
        with open(filename) as f:
            self.data = json.load(f)
        self.variables = []
        if isinstance(self.data, dict):
            for name, values in self.data.items():
                if isinstance(values, list):
                    self.add(DumpVariable(name, values))
        return self.data
