//! CSV artifacts with fixed 17-significant-digit float formatting.

use std::io::Write;

use crate::error::{Result, SpecError};
use crate::fit::ExpansionFit;

/// Round-trip float formatting, identical across runs.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn io(e: csv::Error) -> SpecError {
    SpecError::Io(e.to_string())
}

fn write_rows<W: Write>(w: W, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header).map_err(io)?;
    for r in rows {
        out.write_record(&r).map_err(io)?;
    }
    out.flush()?;
    Ok(())
}

/// `p,index,eigenvalue`
pub fn write_spectrum<W: Write>(w: W, rows: &[(u32, usize, f64)]) -> Result<()> {
    write_rows(w, &["p", "index", "eigenvalue"], rows.iter().map(|(p, i, v)| vec![p.to_string(), i.to_string(), fmt17(*v)]))
}

#[derive(Clone, Debug)]
pub struct BergmanRow {
    pub p: u32,
    pub x: [f64; 2],
    pub b: [f64; 3],
}

/// `p,x1,x2,B0,B1,B2`
pub fn write_bergman<W: Write>(w: W, rows: &[BergmanRow]) -> Result<()> {
    write_rows(
        w,
        &["p", "x1", "x2", "B0", "B1", "B2"],
        rows.iter().map(|r| {
            let mut v = vec![r.p.to_string(), fmt17(r.x[0]), fmt17(r.x[1])];
            v.extend(r.b.iter().map(|x| fmt17(*x)));
            v
        }),
    )
}

/// `coefficient,value,stderr`, one row per b̂_{0,r}.
pub fn write_fit<W: Write>(w: W, fit: &ExpansionFit) -> Result<()> {
    write_rows(
        w,
        &["coefficient", "value", "stderr"],
        fit.coefficients
            .iter()
            .zip(&fit.stderr)
            .enumerate()
            .map(|(r, (c, s))| vec![format!("b0{r}"), fmt17(*c), fmt17(*s)]),
    )
}

/// `p,sup_error`
pub fn write_embed<W: Write>(w: W, rows: &[(u32, f64)]) -> Result<()> {
    write_rows(w, &["p", "sup_error"], rows.iter().map(|(p, e)| vec![p.to_string(), fmt17(*e)]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            let s = fmt17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt17(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn spectrum_layout() {
        let mut buf = Vec::new();
        write_spectrum(&mut buf, &[(8, 0, 0.5)]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "p,index,eigenvalue\n8,0,5.0000000000000000e-1\n");
    }
}
