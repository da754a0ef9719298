# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

import csv
import os
from typing import Any, Dict, List, Mapping, Sequence, Union


def format_cell(value: Any) -> str:
    """CSV text of one cell: floats with 10 significant digits, everything else through ``str``."""
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def write_csv(
    path: Union[str, os.PathLike],
    rows: Sequence[Mapping[str, Any]],
    columns: Sequence[str],
) -> None:
    """Write ``rows`` as comma-separated values with LF line endings and a header of ``columns``."""
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(columns), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: format_cell(row[key]) for key in columns})


def read_csv(path: Union[str, os.PathLike]) -> List[Dict[str, str]]:
    with open(path, newline="") as f:
        return list(csv.DictReader(f))
