from enum import StrEnum


class BackendType(StrEnum):
    CLARABEL = "clarabel"
    SCS = "scs"
    CVXPY = "cvxpy"
