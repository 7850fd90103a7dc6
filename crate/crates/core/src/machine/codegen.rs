use std::fmt::Write;

use super::{Instr, Program};

fn line(instr: &Instr) -> String {
    match *instr {
        Instr::In(c) => format!("in {c}"),
        Instr::Out(c) => format!("out {c}"),
        Instr::Rack(r) => format!("rack {r}"),
        Instr::Knit { dir, loc, carrier } => format!("knit {} {loc} {carrier}", dir.symbol()),
        Instr::Tuck { dir, loc, carrier } => format!("tuck {} {loc} {carrier}", dir.symbol()),
        Instr::Miss { dir, loc, carrier } => format!("miss {} {loc} {carrier}", dir.symbol()),
        Instr::Split {
            dir,
            from,
            to,
            carrier,
        } => format!("split {} {from} {to} {carrier}", dir.symbol()),
        Instr::Xfer { from, to } => format!("xfer {from} {to}"),
        Instr::Drop(loc) => format!("drop {loc}"),
    }
}

/// Knitout-style text: version and carrier headers, then every pass under a
/// `;pass <step> <kind> <count>` comment.
pub fn generate_code(program: &Program) -> String {
    let mut s = String::from(";!knitout-2\n");
    let carriers: Vec<String> = program.carriers.iter().map(u32::to_string).collect();
    writeln!(s, ";;Carriers: {}", carriers.join(" ")).unwrap();
    for pass in &program.passes {
        writeln!(
            s,
            ";pass {} {} {}",
            pass.step,
            pass.kind.name(),
            pass.entries.len()
        )
        .unwrap();
        for e in &pass.entries {
            s.push_str(&line(&e.instr));
            s.push('\n');
        }
    }
    s
}
