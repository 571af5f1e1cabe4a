//! Log-FER versus average SNR line plots written as SVG.

use std::path::Path;

use plotters::prelude::*;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Dashed,
    Markers,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub style: Style,
    /// Index into the palette; series of the same family share a color.
    pub color: usize,
    pub points: Vec<(f64, f64)>,
}

/// Lowest FER shown on the axis.
const FER_AXIS_FLOOR: f64 = 1e-8;

fn draw_err<E: std::error::Error + Send + Sync>(e: DrawingAreaErrorKind<E>) -> CliError {
    CliError::Io(std::io::Error::other(e.to_string()))
}

pub fn write_fer_plot(path: &Path, title: &str, series: &[Series]) -> CliResult<()> {
    let positive = |s: &Series| -> Vec<(f64, f64)> {
        s.points
            .iter()
            .copied()
            .filter(|&(x, y)| x.is_finite() && y > 0.0 && y.is_finite())
            .collect()
    };
    let all: Vec<(f64, f64)> = series.iter().flat_map(positive).collect();
    let (x0, x1) = all
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (x0, x1) = if x0 < x1 { (x0, x1) } else { (0.0, 1.0) };
    let y_min = all.iter().map(|p| p.1).fold(1.0, f64::min).max(FER_AXIS_FLOOR);
    let y0 = 10f64.powf(y_min.log10().floor());

    let root = SVGBackend::new(path, (800, 600)).into_drawing_area();
    root.fill(&WHITE).map_err(draw_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(15)
        .x_label_area_size(45)
        .y_label_area_size(70)
        .build_cartesian_2d(x0..x1, (y0..1.0).log_scale())
        .map_err(draw_err)?;
    chart
        .configure_mesh()
        .x_desc("average SNR (dB)")
        .y_desc("FER")
        .y_label_formatter(&|y| format!("{y:.0e}"))
        .draw()
        .map_err(draw_err)?;

    for s in series {
        let pts: Vec<(f64, f64)> = positive(s).into_iter().filter(|p| p.1 >= y0).collect();
        if pts.is_empty() {
            continue;
        }
        let color = Palette99::pick(s.color).to_rgba();
        let legend_color = color;
        match s.style {
            Style::Line => chart
                .draw_series(LineSeries::new(pts, color.stroke_width(2)))
                .map_err(draw_err)?
                .label(s.label.clone())
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], legend_color.stroke_width(2))),
            Style::Dashed => chart
                .draw_series(DashedLineSeries::new(pts, 6, 4, color.stroke_width(1)))
                .map_err(draw_err)?
                .label(s.label.clone())
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], legend_color)),
            Style::Markers => chart
                .draw_series(pts.into_iter().map(|p| Circle::new(p, 4, color.stroke_width(2))))
                .map_err(draw_err)?
                .label(s.label.clone())
                .legend(move |(x, y)| Circle::new((x + 10, y), 4, legend_color.stroke_width(2))),
        };
    }
    chart
        .configure_series_labels()
        .position(SeriesLabelPosition::LowerLeft)
        .background_style(WHITE.mix(0.85))
        .border_style(BLACK)
        .draw()
        .map_err(draw_err)?;
    root.present().map_err(draw_err)?;
    Ok(())
}
