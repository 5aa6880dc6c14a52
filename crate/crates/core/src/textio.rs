//! Shared formatting for the text exports (CSV, DOT, Newick, SVG).

use ndarray::Array2;
use std::io::{self, Write};

/// Formats a float with 15 significant digits so exports diff cleanly
/// across languages. Negative zero is folded into zero.
pub fn sig15(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.14e}")
}

/// Writes a square labeled matrix as CSV: corner cell `ticker`, one header
/// column per label, one row per label.
pub fn write_labeled_matrix<W: Write>(
    mut w: W,
    labels: &[String],
    values: &Array2<f64>,
) -> io::Result<()> {
    write!(w, "ticker")?;
    for label in labels {
        write!(w, ",{label}")?;
    }
    writeln!(w)?;
    for (i, label) in labels.iter().enumerate() {
        write!(w, "{label}")?;
        for j in 0..labels.len() {
            write!(w, ",{}", sig15(values[[i, j]]))?;
        }
        writeln!(w)?;
    }
    Ok(())
}
