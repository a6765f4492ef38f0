from typing import List, Sequence, Tuple


class SnapshotChunker:
    """Divides a snapshot list into contiguous, nearly equal chunks."""

    def __init__(self, n_items: int, n_chunks: int):
        if n_chunks < 1:
            raise ValueError("n_chunks must be at least 1")
        self.n_items = n_items
        self.n_chunks = n_chunks

    def create_chunks(self) -> List[Tuple[int, int]]:
        """Create (start, end) index ranges covering every item exactly once.

        Returns:
            List of (start, end) tuples; never more chunks than items
        """
        return chunk_ranges(self.n_items, self.n_chunks)

    def split(self, items: Sequence) -> List[Sequence]:
        return [items[start:end] for start, end in self.create_chunks()]


def chunk_ranges(n_items: int, n_chunks: int) -> List[Tuple[int, int]]:
    if n_items <= 0:
        return []
    n_chunks = max(1, min(n_chunks, n_items))
    size, extra = divmod(n_items, n_chunks)
    ranges = []
    start = 0
    for k in range(n_chunks):
        end = start + size + (1 if k < extra else 0)
        ranges.append((start, end))
        start = end
    return ranges
