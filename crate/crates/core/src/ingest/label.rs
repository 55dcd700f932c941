use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The five traffic classes, numbered as in the evaluation tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassLabel {
    Normal = 1,
    Probe = 2,
    DoS = 3,
    U2Su = 4,
    R2L = 5,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 5] = [
        ClassLabel::Normal,
        ClassLabel::Probe,
        ClassLabel::DoS,
        ClassLabel::U2Su,
        ClassLabel::R2L,
    ];

    /// Zero-based position in [`ClassLabel::ALL`].
    pub fn index(self) -> usize {
        self as usize - 1
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    /// One-based class number (Normal = 1 ... R2L = 5).
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        code.checked_sub(1).and_then(|i| Self::from_index(i as usize))
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassLabel::Normal => "Normal",
            ClassLabel::Probe => "Probe",
            ClassLabel::DoS => "DoS",
            ClassLabel::U2Su => "U2Su",
            ClassLabel::R2L => "R2L",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The 22 attack names of the KDD Cup 99 training data with their category.
pub const ATTACK_LABELS: [(&str, ClassLabel); 22] = [
    ("back", ClassLabel::DoS),
    ("land", ClassLabel::DoS),
    ("neptune", ClassLabel::DoS),
    ("pod", ClassLabel::DoS),
    ("smurf", ClassLabel::DoS),
    ("teardrop", ClassLabel::DoS),
    ("satan", ClassLabel::Probe),
    ("ipsweep", ClassLabel::Probe),
    ("nmap", ClassLabel::Probe),
    ("portsweep", ClassLabel::Probe),
    ("buffer_overflow", ClassLabel::U2Su),
    ("loadmodule", ClassLabel::U2Su),
    ("perl", ClassLabel::U2Su),
    ("rootkit", ClassLabel::U2Su),
    ("guess_passwd", ClassLabel::R2L),
    ("ftp_write", ClassLabel::R2L),
    ("imap", ClassLabel::R2L),
    ("phf", ClassLabel::R2L),
    ("multihop", ClassLabel::R2L),
    ("warezmaster", ClassLabel::R2L),
    ("warezclient", ClassLabel::R2L),
    ("spy", ClassLabel::R2L),
];

/// Maps a raw KDD label (trailing period already stripped or not) to its class.
pub fn map_label(raw: &str) -> Result<ClassLabel> {
    let label = raw.trim().trim_end_matches('.');
    if label == "normal" {
        return Ok(ClassLabel::Normal);
    }
    ATTACK_LABELS
        .iter()
        .find(|(name, _)| *name == label)
        .map(|&(_, class)| class)
        .ok_or_else(|| Error::UnknownLabel(raw.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_and_known_attacks() {
        assert_eq!(map_label("normal").unwrap(), ClassLabel::Normal);
        assert_eq!(map_label("smurf").unwrap(), ClassLabel::DoS);
        assert_eq!(map_label("buffer_overflow").unwrap(), ClassLabel::U2Su);
        assert_eq!(map_label("warezclient.").unwrap(), ClassLabel::R2L);
        assert_eq!(map_label("portsweep").unwrap(), ClassLabel::Probe);
    }

    #[test]
    fn unknown_label_names_the_string() {
        let err = map_label("mscan").unwrap_err();
        assert!(err.to_string().contains("mscan"));
    }

    #[test]
    fn category_sizes_of_the_ten_percent_file() {
        // Per-label counts of kddcup.data_10_percent; the category totals
        // must match the published class distribution.
        let counts = [
            ("smurf", 280790),
            ("neptune", 107201),
            ("back", 2203),
            ("teardrop", 979),
            ("pod", 264),
            ("land", 21),
            ("satan", 1589),
            ("ipsweep", 1247),
            ("portsweep", 1040),
            ("nmap", 231),
            ("warezclient", 1020),
            ("guess_passwd", 53),
            ("warezmaster", 20),
            ("imap", 12),
            ("ftp_write", 8),
            ("multihop", 7),
            ("phf", 4),
            ("spy", 2),
            ("buffer_overflow", 30),
            ("rootkit", 10),
            ("loadmodule", 9),
            ("perl", 3),
        ];
        let mut totals = [0usize; 5];
        for (name, n) in counts {
            totals[map_label(name).unwrap().index()] += n;
        }
        totals[0] += 97278;
        assert_eq!(totals, [97278, 4107, 391458, 52, 1126]);
        assert_eq!(totals.iter().sum::<usize>(), 494021);
    }

    #[test]
    fn code_round_trip() {
        for c in ClassLabel::ALL {
            assert_eq!(ClassLabel::from_code(c.code()), Some(c));
            assert_eq!(ClassLabel::from_index(c.index()), Some(c));
        }
        assert_eq!(ClassLabel::from_code(0), None);
        assert_eq!(ClassLabel::from_code(6), None);
    }
}
