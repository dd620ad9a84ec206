"""
Cross-layer sharing schemes and canonical parameter identities.

A block parameter is addressed by (component, stack index r, dilation index x,
role). Sharing through stacks erases r, sharing through dilations erases x;
every site whose canonical key coincides reads the same tensor.
"""

from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

BLOCK_SITE = "block"
NON_BLOCK_SITES = ("encoder", "decoder", "bottleneck", "mask_head")
COMPONENTS = ("separable", "pointwise")
WILDCARD = "*"


class SharingScheme(Enum):
    NONE = "n"
    STACK = "s"
    DILATION = "d"
    ALL = "a"

    @property
    def shares_stacks(self) -> bool:
        return self in (SharingScheme.STACK, SharingScheme.ALL)

    @property
    def shares_dilations(self) -> bool:
        return self in (SharingScheme.DILATION, SharingScheme.ALL)

    @classmethod
    def parse(cls, code: str) -> "SharingScheme":
        try:
            return cls(code.lower())
        except ValueError:
            raise ValueError(f"Unknown sharing scheme '{code}'. Expected one of n, s, d, a.") from None


# n -> s -> d -> a, the order used for the ablation grid
SCHEME_ORDER = (SharingScheme.NONE, SharingScheme.STACK, SharingScheme.DILATION, SharingScheme.ALL)


@dataclass(frozen=True)
class SharingConfig:
    """Sharing scheme per block component; first letter separable, second pointwise."""

    separable: SharingScheme = SharingScheme.NONE
    pointwise: SharingScheme = SharingScheme.NONE

    @property
    def code(self) -> str:
        return self.separable.value + self.pointwise.value

    @property
    def is_unshared(self) -> bool:
        return self.separable is SharingScheme.NONE and self.pointwise is SharingScheme.NONE

    def scheme_for(self, component: str) -> SharingScheme:
        if component == "separable":
            return self.separable
        if component == "pointwise":
            return self.pointwise
        raise ValueError(f"Unknown block component '{component}'.")

    @classmethod
    def parse(cls, code: str) -> "SharingConfig":
        code = code.strip()
        if len(code) != 2:
            raise ValueError(f"Sharing code must have two letters (separable, pointwise), got '{code}'.")
        return cls(SharingScheme.parse(code[0]), SharingScheme.parse(code[1]))

    def __str__(self):
        return self.code


UNSHARED = SharingConfig()


@dataclass(frozen=True)
class ParamKey:
    """Identity of one parameter tensor.

    Non-block keys carry only ``site`` and ``role``. Block keys carry the
    component and the (stack, dilation) position; ``None`` marks an erased
    (shared) index and prints as ``*``.
    """

    site: str
    role: str
    component: Optional[str] = None
    stack: Optional[int] = None
    dilation: Optional[int] = None

    def __post_init__(self):
        if self.site == BLOCK_SITE:
            if self.component not in COMPONENTS:
                raise ValueError(f"Block key needs component in {COMPONENTS}, got {self.component!r}.")
        elif self.site in NON_BLOCK_SITES:
            if self.component is not None or self.stack is not None or self.dilation is not None:
                raise ValueError(f"Non-block site '{self.site}' cannot carry block indices.")
        else:
            raise ValueError(f"Unknown parameter site '{self.site}'.")

    @property
    def is_block(self) -> bool:
        return self.site == BLOCK_SITE

    def __str__(self):
        if not self.is_block:
            return f"{self.site}.{self.role}"
        r = WILDCARD if self.stack is None else str(self.stack)
        x = WILDCARD if self.dilation is None else str(self.dilation)
        return f"block.{self.component}.r{r}.x{x}.{self.role}"

    @classmethod
    def parse(cls, text: str) -> "ParamKey":
        parts = text.split(".")
        if len(parts) == 2 and parts[0] in NON_BLOCK_SITES:
            return cls(site=parts[0], role=parts[1])
        if len(parts) == 5 and parts[0] == BLOCK_SITE and parts[2][:1] == "r" and parts[3][:1] == "x":
            r, x = parts[2][1:], parts[3][1:]
            return cls(
                site=BLOCK_SITE,
                role=parts[4],
                component=parts[1],
                stack=None if r == WILDCARD else int(r),
                dilation=None if x == WILDCARD else int(x),
            )
        raise ValueError(f"Malformed parameter key '{text}'.")


def block_key(component: str, stack: int, dilation: int, role: str) -> ParamKey:
    return ParamKey(site=BLOCK_SITE, role=role, component=component, stack=stack, dilation=dilation)


def canonicalize(key: ParamKey, config: SharingConfig) -> ParamKey:
    """Erase the block indices that ``config`` shares for the key's component."""
    if not key.is_block:
        return key
    scheme = config.scheme_for(key.component)
    if scheme is SharingScheme.NONE:
        return key
    return ParamKey(
        site=key.site,
        role=key.role,
        component=key.component,
        stack=None if scheme.shares_stacks else key.stack,
        dilation=None if scheme.shares_dilations else key.dilation,
    )


def unique_site_count(num_blocks: int, num_stacks: int, scheme: SharingScheme) -> int:
    """Number of distinct tensors backing the X*R sites of one component."""
    if num_blocks < 1 or num_stacks < 1:
        raise ValueError(f"X and R must be >= 1, got X={num_blocks}, R={num_stacks}.")
    per_stack = 1 if scheme.shares_dilations else num_blocks
    stacks = 1 if scheme.shares_stacks else num_stacks
    return per_stack * stacks


def enumerate_ablation_grid() -> List[SharingConfig]:
    """All 16 configurations, separable scheme major, pointwise minor."""
    return [SharingConfig(sep, pw) for sep in SCHEME_ORDER for pw in SCHEME_ORDER]


def scheme_flags(config: SharingConfig) -> Tuple[bool, bool, bool, bool]:
    """Checkbox columns of the results table: (sep stack, sep dil, pw stack, pw dil)."""
    return (
        config.separable.shares_stacks,
        config.separable.shares_dilations,
        config.pointwise.shares_stacks,
        config.pointwise.shares_dilations,
    )
