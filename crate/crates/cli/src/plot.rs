//! SVG line plots of trajectory components.

use std::path::Path;

use plotters::prelude::*;

use crate::error::CliError;

/// One named polyline.
pub struct Series<'a> {
    pub name: String,
    pub times: &'a [f64],
    pub values: &'a [f64],
}

const PALETTE: [RGBColor; 6] = [
    RGBColor(31, 119, 180),
    RGBColor(214, 39, 40),
    RGBColor(44, 160, 44),
    RGBColor(148, 103, 189),
    RGBColor(255, 127, 14),
    RGBColor(23, 190, 207),
];

/// Draws every series on shared axes and writes an SVG file.
pub fn line_plot(
    path: &Path,
    title: &str,
    y_label: &str,
    series: &[Series<'_>],
) -> Result<(), CliError> {
    let fail = |e: &dyn std::fmt::Display| CliError::output(path, e);
    let (mut t_lo, mut t_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for (&t, &y) in s.times.iter().zip(s.values) {
            t_lo = t_lo.min(t);
            t_hi = t_hi.max(t);
            y_lo = y_lo.min(y);
            y_hi = y_hi.max(y);
        }
    }
    if t_lo >= t_hi {
        return Err(fail(&"nothing to plot"));
    }
    let pad = ((y_hi - y_lo) * 0.05).max(1e-6);

    let root = SVGBackend::new(path, (960, 540)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| fail(&e))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(t_lo..t_hi, (y_lo - pad)..(y_hi + pad))
        .map_err(|e| fail(&e))?;
    chart
        .configure_mesh()
        .x_desc("t")
        .y_desc(y_label)
        .draw()
        .map_err(|e| fail(&e))?;
    for (i, s) in series.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        chart
            .draw_series(LineSeries::new(
                s.times.iter().copied().zip(s.values.iter().copied()),
                colour.stroke_width(1),
            ))
            .map_err(|e| fail(&e))?
            .label(s.name.clone())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], colour));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(|e| fail(&e))?;
    root.present().map_err(|e| fail(&e))?;
    Ok(())
}
