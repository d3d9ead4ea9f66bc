from .file_tools import FileTools, read_trace

__all__ = ["FileTools", "read_trace"]
