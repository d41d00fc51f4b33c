import os

from buzzscope.software.dump.common import DumpVariable, Dump, format_value
from buzzscope.software.dump.csv import CSVDump
from buzzscope.software.dump.json import JSONDump
from buzzscope.software.dump.record import RecordDump, write_record, read_record, record_bytes

__all__ = ["DumpVariable", "Dump", "format_value", "CSVDump", "JSONDump",
           "RecordDump", "write_record", "read_record", "record_bytes", "save"]


def save(dump, filename):
    """Write `dump` with the writer matching the file extension."""
    name, ext = os.path.splitext(filename)
    if ext == ".csv":
        writer = CSVDump(dump)
    elif ext == ".json":
        writer = JSONDump(dump)
    elif ext == ".bzr":
        writer = dump if isinstance(dump, RecordDump) else RecordDump(dump)
    else:
        raise NotImplementedError(f"no writer for {ext or 'extensionless'} files")
    writer.write(filename)
    return writer
