//! Machine constants, loadable from a JSON file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MachineConstants {
    pub bed_width: u32,
    pub racking_bound: i32,
    pub max_loops: usize,
    pub max_move: i32,
    /// Largest lateral yarn jump (in needles) before continuity tucks are added.
    pub continuity_gap: u32,
    /// Largest yarn span (in needle pitches) before a tension warning.
    pub max_stretch: u32,
    /// Longest miss run a knit may close over.
    pub max_miss: usize,
    /// Emit kickback knits next to imminent increases.
    pub kickback: bool,
}

impl Default for MachineConstants {
    fn default() -> Self {
        Self {
            bed_width: 540,
            racking_bound: 4,
            max_loops: 3,
            max_move: 4,
            continuity_gap: 2,
            max_stretch: 2,
            max_miss: 4,
            kickback: false,
        }
    }
}

impl MachineConstants {
    pub fn from_json(text: &str) -> Result<Self, Error> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_files_fill_defaults() {
        let c = MachineConstants::from_json(r#"{"bed_width": 32, "max_loops": 2}"#).unwrap();
        assert_eq!(c.bed_width, 32);
        assert_eq!(c.max_loops, 2);
        assert_eq!(c.racking_bound, 4);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(MachineConstants::from_json(r#"{"bedwidth": 3}"#).is_err());
    }
}
