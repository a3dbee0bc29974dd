//! Prints the stacks GlyphNet sees when fine-tuning on "TOWER" and where
//! each of the 26 output letters comes from.

use mcgan::mcgan_stack::LeaveOneOutPlan;
use mcgan::{letter, LetterSet};

fn word(s: LetterSet) -> String {
    let w: String = s.iter().map(letter).collect();
    if w.is_empty() {
        "(blank)".into()
    } else {
        w
    }
}

fn main() -> mcgan::Result<()> {
    let plan = LeaveOneOutPlan::new(LetterSet::from_word("TOWER")?)?;
    for (i, c) in plan.conditions().iter().enumerate() {
        let out: String = plan.extract().iter().filter(|e| e.0 == i).map(|e| letter(e.1)).collect();
        println!("stack {i}: sees {:<6} supplies {out}", word(*c));
    }
    Ok(())
}
