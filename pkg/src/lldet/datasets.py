"""Dataset ingestion and interchange.

Covers the three file formats the pipeline speaks:

* dark-scene annotation text files, one per image, ``classname l t w h
  [extras...]`` with ``%``-prefixed header lines,
* detection dumps as a JSON array of
  ``{image_id, class_name, bbox: [l, t, w, h], score}`` records,
* binary PPM (P6, maxval 255) as the bit-exact raster interchange format.

The class table maps the 12 dark-dataset category names onto COCO-style
canonical names ("people" -> "person" and so on), case-insensitively.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    InvalidInputError,
    ParseError,
    TruncationError,
    UnknownClassError,
    UnsupportedFormatError,
    ValidationError,
)
from .evalmap import BoundingBox, Detection, GroundTruth
from .pixelops import RasterImage

__all__ = [
    "ClassTable",
    "DatasetIndex",
    "ImageRecord",
    "ParsedAnnotations",
    "ParsedDetections",
    "default_class_table",
    "map_class_name",
    "parse_exdark_annotations",
    "parse_detections",
    "load_annotation_dir",
    "read_ppm",
    "write_ppm",
]

# Canonical vocabulary, alphabetical, ids dense from 0.
_CANONICAL = (
    "bicycle",
    "boat",
    "bottle",
    "bus",
    "car",
    "cat",
    "chair",
    "cup",
    "dining table",
    "dog",
    "motorcycle",
    "person",
)

_ALIASES = {
    "people": "person",
    "motorbike": "motorcycle",
    "table": "dining table",
}


@dataclass(frozen=True)
class ClassTable:
    """Canonical id <-> name mapping plus a lowercase alias map."""

    names: tuple[str, ...]
    aliases: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        lowered = [n.lower() for n in self.names]
        if len(set(lowered)) != len(lowered):
            raise InvalidInputError("canonical class names must be unique")
        for alias, target in self.aliases.items():
            if target.lower() not in lowered:
                raise InvalidInputError(
                    f"alias {alias!r} points at unknown class {target!r}"
                )

    def resolve(self, name: str) -> int:
        """Case-insensitive name or alias -> canonical id."""
        key = name.strip().lower()
        for i, canonical in enumerate(self.names):
            if key == canonical.lower():
                return i
        target = self.aliases.get(key)
        if target is not None:
            return self.resolve(target)
        raise UnknownClassError(f"no mapping for class name {name!r}")

    def name_of(self, class_id: int) -> str:
        if not 0 <= class_id < len(self.names):
            raise InvalidInputError(f"class id {class_id} out of range")
        return self.names[class_id]

    def __len__(self):
        return len(self.names)


def default_class_table() -> ClassTable:
    """The 12-category dark-dataset vocabulary in COCO naming."""
    return ClassTable(_CANONICAL, dict(_ALIASES))


def map_class_name(name: str, table: ClassTable | None = None) -> int:
    """Resolve a (possibly aliased) class name to its canonical id."""
    return (table or default_class_table()).resolve(name)


@dataclass(frozen=True)
class ImageRecord:
    image_id: str
    path: str | None = None
    width: int | None = None
    height: int | None = None


@dataclass
class ParsedAnnotations:
    boxes: list[GroundTruth]
    skipped: list[tuple[int, str]]  # (line number, class name) of unknown classes


@dataclass
class ParsedDetections:
    detections: list[Detection]
    skipped: list[tuple[int, str]]  # (record index, class name) of unknown classes


def parse_exdark_annotations(
    text: str, table: ClassTable, image_id: str
) -> ParsedAnnotations:
    """Parse one annotation file into ground-truth boxes.

    Lines starting with ``%`` are headers and skipped; blank lines are
    ignored.  Each remaining line is ``classname l t w h`` followed by
    ignored extras.  Unknown class names are collected as skips rather
    than failing the file; malformed numbers fail with the line number.
    """
    boxes: list[GroundTruth] = []
    skipped: list[tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        tokens = line.split()
        if len(tokens) < 5:
            raise ParseError(
                f"expected 'classname l t w h [extras...]', got {len(tokens)} fields",
                line=lineno,
                source=image_id,
            )
        name = tokens[0]
        try:
            l, t, w, h = (float(tok) for tok in tokens[1:5])
        except ValueError as exc:
            raise ParseError(
                f"malformed numeric field: {exc}", line=lineno, source=image_id
            ) from None
        try:
            class_id = table.resolve(name)
        except UnknownClassError:
            skipped.append((lineno, name))
            continue
        try:
            box = BoundingBox(l, t, w, h)
        except ValidationError as exc:
            raise ParseError(str(exc), line=lineno, source=image_id) from None
        boxes.append(GroundTruth(image_id=image_id, class_id=class_id, box=box))
    return ParsedAnnotations(boxes, skipped)


def parse_detections(text: str, table: ClassTable | None = None) -> ParsedDetections:
    """Parse a detections JSON dump.

    The payload must be an array of objects with fields ``image_id``
    (string), ``class_name`` (string), ``bbox`` ([l, t, w, h] numbers)
    and ``score`` (number).  Extra keys are tolerated.  Scores outside
    [0, 1] and nonpositive box extents are validation errors; records
    naming unknown classes are skipped and reported.
    """
    table = table or default_class_table()
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    if not isinstance(payload, list):
        raise ParseError("detections payload must be a JSON array")
    detections: list[Detection] = []
    skipped: list[tuple[int, str]] = []
    for i, rec in enumerate(payload):
        where = f"record {i}"
        if not isinstance(rec, dict):
            raise ParseError(f"{where}: expected an object")
        for key, kind in (("image_id", str), ("class_name", str)):
            if not isinstance(rec.get(key), kind):
                raise ParseError(f"{where}: missing or non-string {key!r}")
        bbox = rec.get("bbox")
        if (
            not isinstance(bbox, list)
            or len(bbox) != 4
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in bbox)
        ):
            raise ParseError(f"{where}: bbox must be [l, t, w, h] numbers")
        score = rec.get("score")
        if not isinstance(score, (int, float)) or isinstance(score, bool):
            raise ParseError(f"{where}: missing or non-numeric score")
        if not 0.0 <= float(score) <= 1.0:
            raise ValidationError(f"{where}: score {score} outside [0, 1]")
        try:
            class_id = table.resolve(rec["class_name"])
        except UnknownClassError:
            skipped.append((i, rec["class_name"]))
            continue
        try:
            box = BoundingBox(*(float(v) for v in bbox))
        except ValidationError as exc:
            raise ValidationError(f"{where}: {exc}") from None
        detections.append(
            Detection(
                image_id=rec["image_id"],
                class_id=class_id,
                box=box,
                score=float(score),
            )
        )
    return ParsedDetections(detections, skipped)


@dataclass
class DatasetIndex:
    """Immutable-after-load map of images and their ground-truth boxes."""

    images: dict[str, ImageRecord]
    ground_truths: list[GroundTruth]
    skipped: list[tuple[str, int, str]]  # (image id, line, class name)

    def __post_init__(self):
        ids = set(self.images)
        if len(self.images) != len(ids):
            raise ValidationError("duplicate image ids in index")
        for gt in self.ground_truths:
            if gt.image_id not in ids:
                raise ValidationError(
                    f"ground truth references unknown image id {gt.image_id!r}"
                )


def load_annotation_dir(path, table: ClassTable | None = None) -> DatasetIndex:
    """Load every ``*.txt`` annotation file under a directory.

    The image id is the file name with its ``.txt`` suffix removed
    (``2015_00001.png.txt`` -> ``2015_00001.png``).
    """
    table = table or default_class_table()
    root = Path(path)
    if not root.is_dir():
        raise InvalidInputError(f"annotation directory {root} does not exist")
    images: dict[str, ImageRecord] = {}
    gts: list[GroundTruth] = []
    skipped: list[tuple[str, int, str]] = []
    for file in sorted(root.glob("*.txt")):
        image_id = file.name[: -len(".txt")]
        parsed = parse_exdark_annotations(
            file.read_text(encoding="utf-8"), table, image_id
        )
        images[image_id] = ImageRecord(image_id=image_id, path=str(file))
        gts.extend(parsed.boxes)
        skipped.extend((image_id, line, name) for line, name in parsed.skipped)
    return DatasetIndex(images=images, ground_truths=gts, skipped=skipped)


_WHITESPACE = b" \t\r\n\v\f"


def _read_ppm_token(data: bytes, pos: int) -> tuple[bytes, int]:
    """Next header token, skipping whitespace and # comments."""
    n = len(data)
    while pos < n:
        c = data[pos : pos + 1]
        if c in (b"#",):
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c in _WHITESPACE:
            pos += 1
        else:
            break
    if pos >= n:
        raise TruncationError("PPM header ended early")
    start = pos
    while pos < n and data[pos : pos + 1] not in _WHITESPACE and data[pos : pos + 1] != b"#":
        pos += 1
    return data[start:pos], pos


def read_ppm(data: bytes) -> RasterImage:
    """Decode a binary P6 PPM with maxval 255."""
    if not isinstance(data, (bytes, bytearray, memoryview)):
        raise InvalidInputError("read_ppm expects bytes")
    data = bytes(data)
    if len(data) < 2:
        raise TruncationError("not enough bytes for a PPM magic")
    magic = data[:2]
    if magic != b"P6":
        raise UnsupportedFormatError(f"unsupported magic {magic!r}, only P6 is handled")
    pos = 2
    fields = []
    for label in ("width", "height", "maxval"):
        token, pos = _read_ppm_token(data, pos)
        try:
            value = int(token)
        except ValueError:
            raise ParseError(f"non-integer {label} token {token!r}") from None
        fields.append(value)
    width, height, maxval = fields
    if maxval != 255:
        raise UnsupportedFormatError(f"unsupported maxval {maxval}, only 255 is handled")
    if width < 1 or height < 1:
        raise ParseError(f"invalid extent {width}x{height}")
    if pos >= len(data) or data[pos : pos + 1] not in _WHITESPACE:
        raise ParseError("missing whitespace after maxval")
    pos += 1
    need = width * height * 3
    payload = data[pos : pos + need]
    if len(payload) < need:
        raise TruncationError(
            f"payload holds {len(payload)} bytes, header promises {need}"
        )
    return RasterImage(width, height, 3, np.frombuffer(payload, dtype=np.uint8))


def write_ppm(img: RasterImage) -> bytes:
    """Encode as canonical ``P6\\n{w} {h}\\n255\\n`` + raw samples."""
    if img.channels != 3:
        raise UnsupportedFormatError("P6 carries 3-channel images only")
    header = f"P6\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.data.tobytes()
