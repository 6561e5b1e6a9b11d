"""Small helpers shared across modules."""


class InputError(ValueError):
    """Bad user input or artifact contents; maps to CLI exit code 2."""


def fisher_yates(items, rng):
    """In-place Fisher-Yates shuffle driven by a numpy Generator."""
    for i in range(len(items) - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        items[i], items[j] = items[j], items[i]
    return items


def fmt6(x):
    """Format a float with 6 significant digits for CSV and log output."""
    return format(float(x), ".6g")
