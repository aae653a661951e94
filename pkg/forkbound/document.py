# -*- coding: utf-8 -*-

# Copyright 2026 The forkbound authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""
CSV documents with a ``#`` metadata header. Numbers are written with
``repr`` so output is byte-identical for identical input.
"""

import csv
import io
import logging
import os
import sys
from collections import namedtuple

from forkbound.version import VERSION

log = logging.getLogger("forkbound")

Table = namedtuple("Table", "name columns rows metadata")


def _cell(value):
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)


def csv_document(columns, rows, metadata=None, context=None):
    out = io.StringIO()
    out.write("# forkbound %s\n" % VERSION)
    for key, value in (metadata or {}).items():
        out.write("# %s: %s\n" % (key, _cell(value)))
    if context is not None:
        for mode, text in context.log:
            out.write("# %s: %s\n" % (mode, text))
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        if len(row) != len(columns):
            raise ValueError("row %r does not match columns %r" % (row, columns))
        writer.writerow([_cell(v) for v in row])
    return out.getvalue()


def table_document(table, context=None):
    return csv_document(table.columns, table.rows, table.metadata, context)


def write_document(text, dest=None):
    """
    Write to the path ``dest``, or to stdout if ``dest`` is None or "-".
    """
    if dest in (None, "-"):
        sys.stdout.write(text)
        return None
    directory = os.path.dirname(dest)
    if directory and not os.path.isdir(directory):
        os.makedirs(directory)
    with open(dest, "w", newline="") as f:
        f.write(text)
    log.debug("wrote %s (%d bytes)", dest, len(text))
    return dest


def write_tables(tables, directory, context=None):
    """
    One ``<name>.csv`` per table in ``directory`` (stdout if None).
    """
    written = []
    for table in tables:
        dest = None if directory in (None, "-") else os.path.join(directory, table.name + ".csv")
        written.append(write_document(table_document(table, context), dest))
    return written
