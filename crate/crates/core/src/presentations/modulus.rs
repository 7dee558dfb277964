//! Stability moduli `n ↦ m`: a defect of at most `2⁻ᵐ` can be repaired by a
//! move of less than `2⁻ⁿ`.

use std::fmt;

/// How a modulus is computed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModulusRule {
    /// `m = slope·n + offset`.
    Affine { slope: u32, offset: u32 },
    /// `m = base(n + shift)`.
    Shifted { base: Box<ModulusRule>, shift: u32 },
    /// `m = max(floor, 2n + offset)`: the budget for rounding a family of
    /// orthogonal projections that sum to the unit.
    UnitBudget { floor: u32, offset: u32 },
    /// Pointwise maximum.
    Max(Vec<ModulusRule>),
}

impl ModulusRule {
    pub fn eval(&self, n: u32) -> u32 {
        match self {
            ModulusRule::Affine { slope, offset } => slope * n + offset,
            ModulusRule::Shifted { base, shift } => base.eval(n + shift),
            ModulusRule::UnitBudget { floor, offset } => (*floor).max(2 * n + offset),
            ModulusRule::Max(rules) => rules.iter().map(|r| r.eval(n)).max().unwrap_or(0),
        }
    }
}

impl fmt::Display for ModulusRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModulusRule::Affine { slope, offset } => write!(f, "{slope}n+{offset}"),
            ModulusRule::Shifted { base, shift } => write!(f, "({base})[n+{shift}]"),
            ModulusRule::UnitBudget { floor, offset } => write!(f, "max({floor},2n+{offset})"),
            ModulusRule::Max(rules) => {
                let parts: Vec<String> = rules.iter().map(|r| r.to_string()).collect();
                write!(f, "max({})", parts.join(","))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilityModulusTable {
    pub presentation_id: String,
    pub rule: ModulusRule,
}

impl StabilityModulusTable {
    pub fn new(presentation_id: impl Into<String>, rule: ModulusRule) -> Self {
        StabilityModulusTable {
            presentation_id: presentation_id.into(),
            rule,
        }
    }

    /// `m = n`.
    pub fn identity() -> Self {
        Self::new(
            "identity",
            ModulusRule::Affine {
                slope: 1,
                offset: 0,
            },
        )
    }

    pub fn modulus(&self, n: u32) -> u32 {
        self.rule.eval(n)
    }

    /// Smallest `n` with `2⁻ⁿ ≤ eps`.
    pub fn target_exponent(eps: f64) -> u32 {
        let mut n = 0;
        while (-(n as f64)).exp2() > eps && n < 1000 {
            n += 1;
        }
        n
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Combination {
    DirectSum,
    MatrixAmplification,
}

fn ceil_log2(size: u32) -> u32 {
    size.max(1).next_power_of_two().trailing_zeros()
}

fn unit_budget(size: u32) -> ModulusRule {
    ModulusRule::UnitBudget {
        floor: 8,
        offset: 6 + 2 * ceil_log2(size),
    }
}

/// Modulus for a composite presentation built from `base`.
///
/// * `DirectSum` of `size` summands: `max(base(n+2), max(8, 2n+6+2⌈log₂ size⌉))`.
/// * `MatrixAmplification` to `M_size`: `base(n + 2⌈log₂ size⌉ + 4)`, and for
///   `size > 1` also the matrix-unit budget `max(8, 2n+6+2⌈log₂ size⌉)`.
pub fn combine_moduli(
    kind: Combination,
    base: &StabilityModulusTable,
    size: u32,
) -> StabilityModulusTable {
    let size = size.max(1);
    let (label, rule) = match kind {
        Combination::DirectSum => (
            format!("direct_sum({},{size})", base.presentation_id),
            ModulusRule::Max(vec![
                ModulusRule::Shifted {
                    base: Box::new(base.rule.clone()),
                    shift: 2,
                },
                unit_budget(size),
            ]),
        ),
        Combination::MatrixAmplification => {
            let shifted = ModulusRule::Shifted {
                base: Box::new(base.rule.clone()),
                shift: 2 * ceil_log2(size) + 4,
            };
            let rule = if size == 1 {
                shifted
            } else {
                ModulusRule::Max(vec![shifted, unit_budget(size)])
            };
            (
                format!("matrix_amplification({},{size})", base.presentation_id),
                rule,
            )
        }
    };
    StabilityModulusTable::new(label, rule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_amplified_by_one_is_a_shift() {
        let t = combine_moduli(
            Combination::MatrixAmplification,
            &StabilityModulusTable::identity(),
            1,
        );
        for n in 0..20 {
            assert_eq!(t.modulus(n), n + 4);
        }
    }

    #[test]
    fn target_exponents() {
        assert_eq!(StabilityModulusTable::target_exponent(1.0), 0);
        assert_eq!(StabilityModulusTable::target_exponent(0.5), 1);
        assert_eq!(StabilityModulusTable::target_exponent(0.1), 4);
        assert_eq!(StabilityModulusTable::target_exponent(0.125), 3);
    }

    fn rule() -> impl Strategy<Value = ModulusRule> {
        (0u32..4, 0u32..10).prop_map(|(slope, offset)| ModulusRule::Affine {
            slope: slope.max(1),
            offset,
        })
    }

    proptest! {
        #[test]
        fn combinations_are_monotone_and_dominate(r in rule(), size in 1u32..9, n in 0u32..40) {
            let base = StabilityModulusTable::new("b", r);
            for kind in [Combination::DirectSum, Combination::MatrixAmplification] {
                let t = combine_moduli(kind, &base, size);
                prop_assert!(t.modulus(n + 1) >= t.modulus(n));
                prop_assert!(t.modulus(n) >= base.modulus(n));
            }
        }
    }
}
