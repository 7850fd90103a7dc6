use std::fmt;

use serde::Serialize;

/// Operation performed on a stitch unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternOp {
    #[default]
    Knit,
    Purl,
    Tuck,
    Miss,
    /// Lateral move of the loop by a nonzero number of wales.
    Move(i32),
    /// One half of a cable crossing. The `over` half travels in front.
    Cross {
        offset: i32,
        over: bool,
    },
}

impl PatternOp {
    /// Parses a drawing-grid opcode: `K P T M L<k> R<k> X+<k> X-<k>`.
    pub fn from_opcode(code: &str) -> Result<Self, String> {
        let num = |s: &str| -> Result<i32, String> {
            let k: i32 = s.parse().map_err(|_| format!("bad opcode {code:?}"))?;
            if k <= 0 {
                return Err(format!("opcode {code:?} needs a positive offset"));
            }
            Ok(k)
        };
        match code {
            "K" => Ok(PatternOp::Knit),
            "P" => Ok(PatternOp::Purl),
            "T" => Ok(PatternOp::Tuck),
            "M" => Ok(PatternOp::Miss),
            _ if code.starts_with("X+") => Ok(PatternOp::Cross {
                offset: num(&code[2..])?,
                over: true,
            }),
            _ if code.starts_with("X-") => Ok(PatternOp::Cross {
                offset: -num(&code[2..])?,
                over: false,
            }),
            _ if code.starts_with('L') => Ok(PatternOp::Move(-num(&code[1..])?)),
            _ if code.starts_with('R') => Ok(PatternOp::Move(num(&code[1..])?)),
            _ => Err(format!("unknown opcode {code:?}")),
        }
    }

    pub fn opcode(&self) -> String {
        match self {
            PatternOp::Knit => "K".into(),
            PatternOp::Purl => "P".into(),
            PatternOp::Tuck => "T".into(),
            PatternOp::Miss => "M".into(),
            PatternOp::Move(k) if *k < 0 => format!("L{}", -k),
            PatternOp::Move(k) => format!("R{k}"),
            PatternOp::Cross { offset, .. } if *offset < 0 => format!("X-{}", -offset),
            PatternOp::Cross { offset, .. } => format!("X+{offset}"),
        }
    }

    /// Lateral offset of the loop after the operation.
    pub fn offset(&self) -> i32 {
        match self {
            PatternOp::Move(k) => *k,
            PatternOp::Cross { offset, .. } => *offset,
            _ => 0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PatternOp::Knit => "knit",
            PatternOp::Purl => "purl",
            PatternOp::Tuck => "tuck",
            PatternOp::Miss => "miss",
            PatternOp::Move(_) => "move",
            PatternOp::Cross { .. } => "cross",
        }
    }
}

impl fmt::Display for PatternOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.opcode())
    }
}
