from pathlib import Path

import hashlib


def sha256_file(path: Path, chunk_size: int = 1 << 20) -> str:
    """Hex SHA-256 digest of a file, read in chunks."""
    digest = hashlib.sha256()
    with Path(path).open("rb") as f:
        for chunk in iter(lambda: f.read(chunk_size), b""):
            digest.update(chunk)
    return digest.hexdigest()


def hash_tree(paths: list[Path]) -> dict[str, str]:
    """Digest every existing file in `paths`, keyed by its string path."""
    return {str(p): sha256_file(p) for p in sorted(map(Path, paths)) if p.is_file()}
