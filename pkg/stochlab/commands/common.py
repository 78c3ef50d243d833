from typing import List


def float_list(text: str) -> List[float]:
    """'0.5,0.8' -> [0.5, 0.8]; admite el prefijo 'a=' de --ar1 a=0.8."""
    if "=" in text:
        text = text.split("=", 1)[1]
    return [float(item) for item in text.split(",") if item.strip()]


def int_list(text: str) -> List[int]:
    return [int(item) for item in text.split(",") if item.strip()]


def str_list(text: str) -> List[str]:
    return [item.strip() for item in text.split(",") if item.strip()]
