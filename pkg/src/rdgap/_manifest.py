"""Run manifests: canonical parameter echo plus output digests.

Every CSV an rdgap command writes starts with `# manifest: <digest>`, where
the digest is the sha256 of the canonical JSON form of the manifest: the
subcommand name, the fully resolved parameters, the tool version, and the
sha256 of each output payload.  CSV payload digests are taken over the bytes
AFTER the comment line (the manifest cannot contain its own digest), so
re-running with equal parameters yields equal payloads, equal manifests, and
byte-identical files.
"""

from __future__ import annotations

import hashlib
import json


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def build_manifest(subcommand: str, parameters: dict, version: str, outputs: dict) -> dict:
    return {
        "subcommand": subcommand,
        "parameters": parameters,
        "version": version,
        "outputs": outputs,
    }


def manifest_digest(manifest: dict) -> str:
    return sha256_hex(canonical_json(manifest).encode("utf-8"))


def csv_with_manifest_comment(payload: str, digest: str) -> str:
    return f"# manifest: {digest}\n{payload}"


def split_manifest_comment(text: str) -> tuple[str, str]:
    """Return (digest, payload) from a CSV written by this tool."""
    first, _, rest = text.partition("\n")
    prefix = "# manifest: "
    if not first.startswith(prefix):
        raise ValueError("missing manifest comment line")
    return first[len(prefix):], rest
