use std::fmt;
use std::str::FromStr;

use serde::Serialize;

/// Deliberate defects that can be switched into the domains to confirm the
/// test harness notices them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mutant {
    /// Interval widening returns the meet instead of an upper bound.
    WidenIsMeet,
    /// Memory meet keeps maps with a bottom entry instead of collapsing them.
    DroppedBotReduction,
    /// `backward_lt` on false shifts `x` up even when `x` contains `max_int`.
    LtWithoutIncrementableGuard,
    /// Interval negation ignores that `-min_int` wraps to `min_int`.
    InvWithoutMinGuard,
    /// `assume` only keeps the strictly positive refinement.
    AssumeWithoutLt0,
}

impl Mutant {
    pub const ALL: [Mutant; 5] = [
        Mutant::WidenIsMeet,
        Mutant::DroppedBotReduction,
        Mutant::LtWithoutIncrementableGuard,
        Mutant::InvWithoutMinGuard,
        Mutant::AssumeWithoutLt0,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mutant::WidenIsMeet => "widen-is-meet",
            Mutant::DroppedBotReduction => "dropped-bot-reduction",
            Mutant::LtWithoutIncrementableGuard => "lt-without-incrementable-guard",
            Mutant::InvWithoutMinGuard => "inv-without-min-guard",
            Mutant::AssumeWithoutLt0 => "assume-without-lt0",
        }
    }
}

impl fmt::Display for Mutant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mutant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mutant::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown mutant `{s}`"))
    }
}
