//! Plot datasets derived from a solved `ln u` profile, with CSV and minimal
//! SVG output.

use std::io::Write;

use crate::asymptotics::{fit_deviation, TailFit};
use crate::error::Result;
use crate::radial::{mass_function, Quantity, RadialProfile};

#[derive(Debug, Clone, PartialEq)]
pub struct Figure {
    pub name: String,
    pub description: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Extra `key: value` lines for the CSV header.
    pub notes: Vec<String>,
}

impl Figure {
    fn new(name: &str, description: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            description: description.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[k]).collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# {}", self.description)?;
        for n in &self.notes {
            writeln!(out, "# {n}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format!("{v:.12e}")))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Polyline of every data column against the first, with a frame and
    /// the axis ranges printed in the corners.
    pub fn to_svg(&self) -> String {
        let (w, h, pad) = (640.0, 400.0, 40.0);
        let xs = self.column(0);
        let finite = |v: &f64| v.is_finite();
        let x_lo = xs
            .iter()
            .copied()
            .filter(finite)
            .fold(f64::INFINITY, f64::min);
        let x_hi = xs
            .iter()
            .copied()
            .filter(finite)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut y_lo = f64::INFINITY;
        let mut y_hi = f64::NEG_INFINITY;
        for k in 1..self.columns.len() {
            for v in self.column(k).into_iter().filter(finite) {
                y_lo = y_lo.min(v);
                y_hi = y_hi.max(v);
            }
        }
        if y_hi <= y_lo {
            y_hi = y_lo + 1.0;
        }
        let sx = |x: f64| pad + (x - x_lo) / (x_hi - x_lo) * (w - 2.0 * pad);
        let sy = |y: f64| h - pad - (y - y_lo) / (y_hi - y_lo) * (h - 2.0 * pad);
        let colours = ["#1f77b4", "#d62728", "#2ca02c"];
        let mut svg = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\">\n\
             <rect x=\"{pad}\" y=\"{pad}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
            w - 2.0 * pad,
            h - 2.0 * pad
        );
        for k in 1..self.columns.len() {
            let pts: Vec<String> = self
                .rows
                .iter()
                .filter(|r| r[0].is_finite() && r[k].is_finite())
                .map(|r| format!("{:.2},{:.2}", sx(r[0]), sy(r[k])))
                .collect();
            svg += &format!(
                "<polyline fill=\"none\" stroke=\"{}\" points=\"{}\"/>\n",
                colours[(k - 1) % colours.len()],
                pts.join(" ")
            );
        }
        svg += &format!(
            "<text x=\"{pad}\" y=\"{}\" font-size=\"11\">{} = {x_lo:.3} .. {x_hi:.3}</text>\n\
             <text x=\"{pad}\" y=\"{}\" font-size=\"11\">{} .. {y_lo:.4} .. {y_hi:.4}</text>\n\
             <text x=\"{pad}\" y=\"15\" font-size=\"12\">{}</text>\n</svg>\n",
            h - 10.0,
            self.columns[0],
            pad - 5.0,
            self.columns[1..].join(", "),
            self.description
        );
        svg
    }
}

fn rows_within(lnu: &RadialProfile, r_plot: f64) -> impl Iterator<Item = (usize, f64)> + '_ {
    lnu.nodes()
        .iter()
        .copied()
        .enumerate()
        .take_while(move |(_, r)| *r <= r_plot + 1e-9)
}

/// `u(r)`.
pub fn profile(lnu: &RadialProfile, r_plot: f64) -> Result<Figure> {
    let mut f = Figure::new(
        "fig1",
        "ground state u(r) in units with E = -1",
        &["r", "u"],
    );
    let ln = lnu.ln_values()?;
    f.rows = rows_within(lnu, r_plot)
        .map(|(i, r)| vec![r, ln[i].exp()])
        .collect();
    Ok(f)
}

/// `M(r)` with its limit `‖u‖₂²`.
pub fn mass(lnu: &RadialProfile, norm_sq: f64, r_plot: f64) -> Result<Figure> {
    let mut f = Figure::new(
        "fig2",
        "mass function M(r) = 4 pi int_0^r u^2 s^2 ds",
        &["r", "M", "asymptote"],
    );
    let u = RadialProfile::log(lnu.grid().clone(), lnu.ln_values()?, Quantity::U)?;
    let m = mass_function(&u)?;
    f.rows = rows_within(lnu, r_plot)
        .map(|(i, r)| vec![r, m.values()[i], norm_sq])
        .collect();
    f.notes.push(format!("asymptote: {norm_sq:.12}"));
    f.notes.push(format!(
        "asymptote_over_pi: {:.12}",
        norm_sq / std::f64::consts::PI
    ));
    Ok(f)
}

/// `ln u(r)` against the slope −1 reference `ln u(0) − r`.
pub fn log_profile(lnu: &RadialProfile, r_plot: f64) -> Result<Figure> {
    let mut f = Figure::new(
        "fig3",
        "ln u(r) with a slope -1 reference line",
        &["r", "ln_u", "slope_minus_one"],
    );
    let ln = lnu.ln_values()?;
    f.rows = rows_within(lnu, r_plot)
        .map(|(i, r)| vec![r, ln[i], ln[0] - r])
        .collect();
    Ok(f)
}

/// `r + ln u(r)`.
pub fn prefactor(lnu: &RadialProfile, r_plot: f64) -> Result<Figure> {
    let mut f = Figure::new(
        "fig4",
        "r + ln u(r), the logarithm of the tail prefactor",
        &["r", "r_plus_ln_u"],
    );
    let ln = lnu.ln_values()?;
    f.rows = rows_within(lnu, r_plot)
        .map(|(i, r)| vec![r, r + ln[i]])
        .collect();
    Ok(f)
}

/// `−ln(u / (A r^β e^{−r}))` from `r = 1`.
pub fn fit_residual(lnu: &RadialProfile, fit: &TailFit, r_plot: f64) -> Result<Figure> {
    let mut f = Figure::new(
        "fig5",
        "-ln(u / (A r^beta e^-r)) for the fitted tail law",
        &["r", "minus_ln_ratio"],
    );
    f.rows = fit_deviation(lnu, fit)?
        .into_iter()
        .filter(|(r, _)| *r >= 1.0 && *r <= r_plot + 1e-9)
        .map(|(r, d)| vec![r, d])
        .collect();
    f.notes.push(format!("A: {:.12}", fit.amplitude));
    f.notes.push(format!("beta: {:.12}", fit.beta));
    f.notes.push(format!(
        "window: [{:.6}, {:.6}]",
        fit.window.0, fit.window.1
    ));
    Ok(f)
}

/// All five datasets.
pub fn all(lnu: &RadialProfile, norm_sq: f64, fit: &TailFit, r_plot: f64) -> Result<Vec<Figure>> {
    Ok(vec![
        profile(lnu, r_plot)?,
        mass(lnu, norm_sq, r_plot)?,
        log_profile(lnu, r_plot)?,
        prefactor(lnu, r_plot)?,
        fit_residual(lnu, fit, r_plot)?,
    ])
}

/// Largest second difference and smallest first difference of column 1
/// over `[r1, r2]`, the shape test of the prefactor plot.
pub fn shape_on(fig: &Figure, r1: f64, r2: f64) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = fig
        .rows
        .iter()
        .filter(|r| r[0] >= r1 && r[0] <= r2)
        .map(|r| (r[0], r[1]))
        .collect();
    let min_first = pts
        .windows(2)
        .map(|w| w[1].1 - w[0].1)
        .fold(f64::INFINITY, f64::min);
    let max_second = pts
        .windows(3)
        .map(|w| w[2].1 - 2.0 * w[1].1 + w[0].1)
        .fold(f64::NEG_INFINITY, f64::max);
    (min_first, max_second)
}
