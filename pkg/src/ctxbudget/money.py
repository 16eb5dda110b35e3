"""Exact fixed-point dollar arithmetic for per-token pricing."""

from decimal import Decimal, ROUND_HALF_UP

CENT = Decimal("0.01")


def dec(value) -> Decimal:
    """Coerce int/str/float/Decimal to Decimal.

    Floats go through str() so 0.2 becomes Decimal("0.2"), not its binary
    expansion.
    """
    if isinstance(value, Decimal):
        return value
    if isinstance(value, float):
        return Decimal(str(value))
    return Decimal(value)


def tokens_cost(tokens, rate_per_mtok) -> Decimal:
    """Dollars for `tokens` billed at `rate_per_mtok` per million tokens.

    scaleb keeps the division by 1e6 an exact exponent shift.
    """
    return (dec(tokens) * dec(rate_per_mtok)).scaleb(-6)


def round_cents(amount) -> Decimal:
    """Round half-up to whole cents (the display convention)."""
    return dec(amount).quantize(CENT, rounding=ROUND_HALF_UP)


def usd(amount) -> str:
    return f"${round_cents(amount)}"
