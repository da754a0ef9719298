# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

from typing import Iterable, Optional

try:
    from tqdm import tqdm

    TQDM_AVAILABLE = True
except ImportError:
    TQDM_AVAILABLE = False


def progress(
    iterable: Iterable,
    verbose: bool = False,
    desc: Optional[str] = None,
    total: Optional[int] = None,
) -> Iterable:
    """Wrap ``iterable`` in a tqdm progress bar when ``verbose`` and tqdm is installed."""
    if verbose and TQDM_AVAILABLE:
        return tqdm(iterable, desc=desc, total=total, dynamic_ncols=True, leave=False)
    return iterable
