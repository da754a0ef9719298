# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

from .corpus import (
    build_corpus,
    CorpusConfig,
    CorpusItem,
    item_seeds,
    MANIFEST_NAME,
    MixtureDataset,
    read_labels,
    read_manifest,
    SPLITS,
    write_labels,
)
from .noise import gen_noise
from .sources import gen_source, token_f0, token_tilt, TokenSource

__all__ = [
    "build_corpus",
    "gen_noise",
    "gen_source",
    "item_seeds",
    "read_labels",
    "read_manifest",
    "token_f0",
    "token_tilt",
    "write_labels",
    "CorpusConfig",
    "CorpusItem",
    "MixtureDataset",
    "TokenSource",
    "MANIFEST_NAME",
    "SPLITS",
]
