from enum import Enum


class RuleFamily(Enum):
    EXTREMUM = "extremum"
    SALIENCE = "salience"
    REGRET = "regret"
    DISAPPOINTMENT = "disappointment"
    ATTENTION = "attention"


class RuleId(Enum):
    """The rule library in its canonical order; every per-rule index follows this order."""
    MMn = "MMn"
    MMa = "MMa"
    MMx = "MMx"
    MAP = "MAP"
    SAL = "SAL"
    SAL2 = "SAL2"
    REG = "REG"
    REGmed = "REGmed"
    DIS = "DIS"
    DISmed = "DISmed"
    A1 = "A1"
    A2 = "A2"

    @property
    def index(self) -> int:
        return _INDEX[self]

    @property
    def family(self) -> RuleFamily:
        return FAMILY_OF[self]

    @property
    def is_attention(self) -> bool:
        return self in ATTENTION_RULES

    @staticmethod
    def parse(name: str) -> 'RuleId':
        try:
            return RuleId(name.strip())
        except ValueError:
            raise ValueError(f"Unknown rule: {name!r}") from None


ALL_RULES: tuple[RuleId, ...] = tuple(RuleId)
_INDEX = {rule: i for i, rule in enumerate(ALL_RULES)}
ATTENTION_RULES: tuple[RuleId, ...] = (RuleId.A1, RuleId.A2)

FAMILY_OF: dict[RuleId, RuleFamily] = {
    RuleId.MMn: RuleFamily.EXTREMUM,
    RuleId.MMa: RuleFamily.EXTREMUM,
    RuleId.MMx: RuleFamily.EXTREMUM,
    RuleId.MAP: RuleFamily.EXTREMUM,
    RuleId.SAL: RuleFamily.SALIENCE,
    RuleId.SAL2: RuleFamily.SALIENCE,
    RuleId.REG: RuleFamily.REGRET,
    RuleId.REGmed: RuleFamily.REGRET,
    RuleId.DIS: RuleFamily.DISAPPOINTMENT,
    RuleId.DISmed: RuleFamily.DISAPPOINTMENT,
    RuleId.A1: RuleFamily.ATTENTION,
    RuleId.A2: RuleFamily.ATTENTION,
}


def sort_rules(rules) -> tuple[RuleId, ...]:
    return tuple(sorted(set(rules), key=lambda rule: rule.index))


def parse_rule_list(text: str) -> tuple[RuleId, ...]:
    if not text:
        return ()
    return sort_rules(RuleId.parse(name) for name in text.split(',') if name.strip())


def rules_in_families(families) -> tuple[RuleId, ...]:
    families = set(families)
    return tuple(rule for rule in ALL_RULES if rule.family in families)
