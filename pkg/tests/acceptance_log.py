"""Per-criterion outcomes, printed in the terminal summary."""

RESULTS: dict[int, tuple[bool, str]] = {}


def record(number: int, ok: bool, detail: str) -> bool:
    RESULTS[number] = (bool(ok), detail)
    return bool(ok)
