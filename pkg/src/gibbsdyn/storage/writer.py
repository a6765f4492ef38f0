from typing import Any, Callable, List, TextIO


class BatchWriter:
    """Buffers records and writes them to a text stream in batches."""

    def __init__(self, stream: TextIO, batch_size: int = 1000,
                 formatter: Callable[[Any], str] = str):
        if batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        self.stream = stream
        self.batch_size = batch_size
        self.formatter = formatter
        self.written = 0
        self._buffer: List[Any] = []

    def add(self, record: Any):
        """Add a record to the buffer. Flushes if buffer is full."""
        self._buffer.append(record)
        if len(self._buffer) >= self.batch_size:
            self.flush()

    def __call__(self, record: Any):
        self.add(record)

    def flush(self):
        """Write all buffered records to the stream."""
        if not self._buffer:
            return
        self.stream.write("".join(self.formatter(record) for record in self._buffer))
        self.written += len(self._buffer)
        self._buffer.clear()

    def __enter__(self) -> "BatchWriter":
        return self

    def __exit__(self, *exc):
        self.flush()
