"""Dataset ingestion for the DCASE-style directory layout.

Expected layout: ``<root>/<machine>/<split>/*.wav`` with filenames
``section_<NN>_<domain>_<split>_<label>_<id>[_extra].wav``.  Labels on
evaluation-only files may be ``unknown``; training files must carry the
``normal`` label since models are fit on normal sounds only.
"""

import logging
import re
from dataclasses import dataclass
from pathlib import Path

from .dsp import AudioClip, AudioReadError, load_wav

log = logging.getLogger(__name__)

_NAME_PATTERN = re.compile(
    r"section_(?P<section>\d{2})"
    r"_(?P<domain>source|target)"
    r"_(?P<split>train|test)"
    r"_(?P<label>normal|anomaly|unknown)"
    r"_(?P<clip_id>\d+)"
    r"(?:_.*)?\.wav"
)

_EXPECTED = "section_<NN>_<source|target>_<train|test>_<normal|anomaly|unknown>_<id>[_extra].wav"


class FilenameError(ValueError):
    """A clip filename does not follow the dataset naming convention."""


class DatasetError(RuntimeError):
    """A dataset directory is missing or unusable."""


@dataclass(frozen=True)
class ClipMetadata:
    machine_type: str
    section: int
    domain: str
    split: str
    label: str
    clip_id: str


def parse_filename(name, machine_type="") -> ClipMetadata:
    """Extract metadata fields from a clip filename."""
    match = _NAME_PATTERN.fullmatch(Path(name).name)
    if match is None:
        raise FilenameError(
            f"cannot parse {name!r}: expected pattern {_EXPECTED}"
        )
    fields = match.groupdict()
    if fields["split"] == "train" and fields["label"] != "normal":
        raise FilenameError(
            f"train clip {name!r} labeled {fields['label']!r}; training data "
            "must be normal sounds"
        )
    return ClipMetadata(
        machine_type=machine_type,
        section=int(fields["section"]),
        domain=fields["domain"],
        split=fields["split"],
        label=fields["label"],
        clip_id=fields["clip_id"],
    )


def scan_split(root, machine, split):
    """List (path, metadata) pairs in lexicographic filename order.

    Files with non-conforming names are skipped with a logged warning;
    a missing directory or one with no WAV files at all is an error.
    """
    directory = Path(root) / machine / split
    if not directory.is_dir():
        raise DatasetError(f"missing dataset directory: {directory}")
    paths = sorted(directory.glob("*.wav"))
    if not paths:
        raise DatasetError(f"zero .wav files in {directory}")
    items = []
    warnings = []
    for path in paths:
        try:
            meta = parse_filename(path.name, machine_type=machine)
        except FilenameError as exc:
            warnings.append(str(exc))
            log.warning("%s", exc)
            continue
        items.append((path, meta))
    if not items:
        raise DatasetError(f"no parseable .wav files in {directory}")
    return items, warnings


@dataclass
class LoadedSplit:
    """Decoded clips plus per-file warnings from skipped entries."""

    items: list  # (AudioClip, ClipMetadata) pairs
    warnings: list


def load_split(root, machine, split) -> LoadedSplit:
    """Load every readable clip of one machine/split into memory."""
    entries, warnings = scan_split(root, machine, split)
    items = []
    for path, meta in entries:
        try:
            clip = load_wav(path)
        except AudioReadError as exc:
            warnings.append(str(exc))
            log.warning("%s", exc)
            continue
        items.append((clip, meta))
    if not items:
        raise DatasetError(f"no readable .wav files under {Path(root) / machine / split}")
    return LoadedSplit(items=items, warnings=warnings)
