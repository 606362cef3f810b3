use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Training method. `Standard` has no adversary; the rest differ in how the
/// discriminator sees the hidden representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "standard")]
    Standard,
    /// Discriminator on `h`.
    #[serde(rename = "adv")]
    Adv,
    /// Discriminator on the class-conditional augmentation of `h`.
    #[serde(rename = "a-adv")]
    AAdv,
    /// Discriminator on `h ⧺ onehot(y)`.
    #[serde(rename = "adv+y")]
    AdvY,
    /// One discriminator per target class.
    #[serde(rename = "adv+sep")]
    AdvSep,
    /// Wider and deeper discriminator on `h`.
    #[serde(rename = "adv+large")]
    AdvLarge,
    /// Several sub-discriminators kept diverse by an orthogonality penalty.
    #[serde(rename = "dadv")]
    DAdv,
    /// DAdv behind the augmentation layer.
    #[serde(rename = "a-dadv")]
    ADAdv,
}

impl Variant {
    pub const ALL: [Variant; 8] = [
        Variant::Standard,
        Variant::Adv,
        Variant::AAdv,
        Variant::AdvY,
        Variant::AdvSep,
        Variant::AdvLarge,
        Variant::DAdv,
        Variant::ADAdv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Standard => "standard",
            Variant::Adv => "adv",
            Variant::AAdv => "a-adv",
            Variant::AdvY => "adv+y",
            Variant::AdvSep => "adv+sep",
            Variant::AdvLarge => "adv+large",
            Variant::DAdv => "dadv",
            Variant::ADAdv => "a-dadv",
        }
    }

    pub fn is_adversarial(self) -> bool {
        self != Variant::Standard
    }

    /// Whether the adversary reads the target label.
    pub fn needs_target(self) -> bool {
        matches!(
            self,
            Variant::AAdv | Variant::AdvY | Variant::AdvSep | Variant::ADAdv
        )
    }

    pub fn is_augmented(self) -> bool {
        matches!(self, Variant::AAdv | Variant::ADAdv)
    }

    pub fn is_diverse(self) -> bool {
        matches!(self, Variant::DAdv | Variant::ADAdv)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase();
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == key)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown variant `{s}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert!("bogus".parse::<Variant>().is_err());
        assert_eq!("A-Adv".parse::<Variant>().unwrap(), Variant::AAdv);
    }
}
