use std::io::Write;
use std::path::PathBuf;

use fastdvm::farey::{count_lines_formula, enumerate_directions, farey_leading_term, farey_series};

use crate::{create_output, CliError, Deadline, GlobalOptions};

#[derive(Clone, Debug, PartialEq)]
pub struct FareyRow {
    pub order: usize,
    pub farey_size: usize,
    pub formula_count: i64,
    pub enumerated_count: usize,
    /// `|F| / leading term`.
    pub leading_ratio: f64,
}

impl FareyRow {
    pub fn agrees(&self) -> bool {
        self.formula_count == self.enumerated_count as i64
    }
}

pub fn farey_rows(dim: usize, min_order: usize, max_order: usize) -> Result<Vec<FareyRow>, CliError> {
    if min_order == 0 || min_order > max_order {
        return Err(CliError::Config(format!(
            "need 1 <= min order <= max order, got {min_order}..{max_order}"
        )));
    }
    (min_order..=max_order)
        .map(|order| {
            let farey_size = farey_series(dim, order).map_err(crate::error::config_err)?.len();
            Ok(FareyRow {
                order,
                farey_size,
                formula_count: count_lines_formula(dim, order)?,
                enumerated_count: enumerate_directions(dim, order)?.len(),
                leading_ratio: farey_size as f64 / farey_leading_term(dim, order)?,
            })
        })
        .collect()
}

pub fn write_farey_csv<W: Write>(rows: &[FareyRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "order,farey_size,formula_count,enumerated_count,agree,leading_ratio")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{:.6}",
            r.order,
            r.farey_size,
            r.formula_count,
            r.enumerated_count,
            r.agrees(),
            r.leading_ratio
        )?;
    }
    Ok(())
}

pub fn cmd_farey(
    dim: usize,
    min_order: usize,
    max_order: usize,
    opts: &GlobalOptions,
) -> Result<(Vec<FareyRow>, PathBuf), CliError> {
    let deadline = Deadline::new(opts.budget);
    let rows = farey_rows(dim, min_order, max_order)?;
    deadline.check("farey")?;
    for r in rows.iter().filter(|r| !r.agrees()) {
        eprintln!(
            "order {}: closed form gives {} lines, enumeration {}",
            r.order, r.formula_count, r.enumerated_count
        );
    }
    let prefix = opts.prefix(None, "fastdvm");
    let (path, mut w) = create_output(&prefix, "farey")?;
    write_farey_csv(&rows, &mut w)?;
    w.flush()?;
    Ok((rows, path))
}
