#
# This file is part of BuzzScope.
#
# SPDX-License-Identifier: BSD-2-Clause

import pandas as pd

from buzzscope.errors import FormatError
from buzzscope.software.dump.common import Dump, DumpVariable, format_value


class CSVDump(Dump):
    def __init__(self, dump=None):
        Dump.__init__(self)
        self.variables = [] if dump is None else dump.variables

    def generate_vars(self):
        return ",".join(variable.name for variable in self.variables) + "\n"

    def generate_dumpvars(self):
        r = []
        for i in range(len(self)):
            cells = []
            for variable in self.variables:
                cells.append(format_value(variable.values[i]) if i < len(variable) else "")
            r.append(",".join(cells) + "\n")
        return "".join(r)

    def write(self, filename):
        with open(filename, "w", newline="") as f:
            f.write(self.generate_vars())
            f.write(self.generate_dumpvars())

    def read(self, filename):
        try:
            frame = pd.read_csv(filename)
        except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise FormatError(str(e), filename) from e
        self.variables = []
        for name in frame.columns:
            column = frame[name]
            self.add(DumpVariable(name, column.to_numpy(), column.dtype))
        return frame
