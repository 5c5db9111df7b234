"""Versioned, checksummed JSON envelopes for persisted artifacts.

Files are UTF-8 JSON with a format tag, a version, a sha256 checksum of
the canonical payload encoding, and the payload itself. Floats survive
round trips exactly because the JSON encoder emits shortest round-trip
decimals.
"""

import hashlib
import json

from .errors import ChecksumError, ModelFormatError, ModelVersionError


def _canonical(payload):
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False)


def payload_checksum(payload):
    return hashlib.sha256(_canonical(payload).encode("utf-8")).hexdigest()


def write_envelope(path, format_tag, version, payload):
    doc = {
        "format": format_tag,
        "version": version,
        "checksum": payload_checksum(payload),
        "payload": payload,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1, allow_nan=False)
        fh.write("\n")


def read_envelope(path, format_tag, version):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ModelFormatError(f"{path}: malformed file: {e}") from e
    if not isinstance(doc, dict) or doc.get("format") != format_tag:
        raise ModelFormatError(f"{path}: not a {format_tag} file")
    if doc.get("version") != version:
        raise ModelVersionError(
            f"{path}: format version {doc.get('version')!r}, expected {version}")
    payload = doc.get("payload")
    if payload is None or "checksum" not in doc:
        raise ModelFormatError(f"{path}: missing payload or checksum")
    if payload_checksum(payload) != doc["checksum"]:
        raise ChecksumError(f"{path}: checksum mismatch, file corrupted")
    return payload
