"""Number formatting shared by the generators."""


def fmt(value: float) -> str:
    """Deterministic, parser-friendly decimal text."""
    if float(value).is_integer():
        return str(int(value))
    text = f"{value:.12f}".rstrip("0")
    return text if not text.endswith(".") else text + "0"
