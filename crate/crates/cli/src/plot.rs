use std::path::Path;

use crate::error::CliError;

/// Line plot of several series over a common abscissa; non-finite samples are skipped.
#[cfg(feature = "plot")]
pub fn render(path: &Path, title: &str, x: &[f64], series: &[(&str, &[f64])]) -> Result<(), CliError> {
    use plotters::prelude::*;

    let fail = |e: &dyn std::fmt::Display| CliError::Numerical(format!("plot {}: {e}", path.display()));
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in series.iter().flat_map(|(_, ys)| ys.iter()).filter(|v| v.is_finite()) {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    if !(hi >= lo) || x.len() < 2 {
        return Err(CliError::Numerical(format!(
            "plot {}: nothing finite to draw",
            path.display()
        )));
    }
    let pad = 0.05 * (hi - lo).max(1e-9);
    let root = SVGBackend::new(path, (960, 540)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| fail(&e))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(32)
        .y_label_area_size(56)
        .build_cartesian_2d(x[0]..x[x.len() - 1], (lo - pad)..(hi + pad))
        .map_err(|e| fail(&e))?;
    chart
        .configure_mesh()
        .x_desc("x")
        .y_desc("V")
        .draw()
        .map_err(|e| fail(&e))?;
    for (k, (name, ys)) in series.iter().enumerate() {
        let color = Palette99::pick(k).to_rgba();
        let points = x
            .iter()
            .zip(ys.iter())
            .filter(|(_, y)| y.is_finite())
            .map(|(a, b)| (*a, *b));
        chart
            .draw_series(LineSeries::new(points, color.stroke_width(1)))
            .map_err(|e| fail(&e))?
            .label(*name)
            .legend(move |(px, py)| PathElement::new(vec![(px, py), (px + 20, py)], color));
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

#[cfg(not(feature = "plot"))]
pub fn render(_: &Path, _: &str, _: &[f64], _: &[(&str, &[f64])]) -> Result<(), CliError> {
    Err(CliError::Usage("built without the plot feature".into()))
}
