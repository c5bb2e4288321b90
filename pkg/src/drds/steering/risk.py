def uniform_risk_split(gamma: float, num_halfspaces: int, num_active_steps: int) -> float:
    """Per-constraint level γ/(J·|active|) so the union bound keeps total risk at γ."""
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    if num_halfspaces < 1 or num_active_steps < 1:
        raise ValueError("need at least one halfspace and one active step")
    return gamma / (num_halfspaces * num_active_steps)
