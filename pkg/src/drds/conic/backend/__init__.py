from drds.conic.backend.types import BackendType

__all__ = ["BackendType"]
