use std::io::Write;

use super::StepFlux;
use crate::error::Result;
use crate::mesh::{centroid, write_vtk, MeshLevel};

/// Plain-text flux coefficients: one `patch` header per vertex followed by
/// one `mode` line per temporal mode.
pub fn write_flux(flux: &StepFlux, w: &mut impl Write) -> Result<()> {
    writeln!(w, "heatflux-flux 1")?;
    writeln!(w, "step {} patches {}", flux.n, flux.patches.len())?;
    for p in &flux.patches {
        writeln!(
            w,
            "patch {} degree {} modes {} dofs {}",
            p.vertex,
            p.space.degree,
            p.modes.len(),
            p.space.n_flux
        )?;
        for m in &p.modes {
            write!(w, "mode")?;
            for x in m {
                write!(w, " {x:e}")?;
            }
            writeln!(w)?;
        }
    }
    Ok(())
}

/// Legacy VTK of `sigma_htau(t)` at fine element centroids, given the
/// temporal basis values `phi_j(t)`.
pub fn write_flux_vtk(
    flux: &StepFlux,
    fine: &MeshLevel,
    phi: &[f64],
    w: &mut impl Write,
) -> Result<()> {
    let (mut s, mut d) = (Vec::new(), Vec::new());
    let mut sx = Vec::with_capacity(fine.n_elements());
    let mut sy = Vec::with_capacity(fine.n_elements());
    let mut dv = Vec::with_capacity(fine.n_elements());
    for t in 0..fine.n_elements() {
        let c = centroid(&fine.element_points(t));
        flux.eval(t, c, &mut s, &mut d);
        sx.push(s.iter().zip(phi).map(|(v, p)| v[0] * p).sum());
        sy.push(s.iter().zip(phi).map(|(v, p)| v[1] * p).sum());
        dv.push(d.iter().zip(phi).map(|(v, p)| v * p).sum());
    }
    write_vtk(
        fine,
        &[
            ("sigma_x", &sx[..]),
            ("sigma_y", &sy[..]),
            ("div_sigma", &dv[..]),
        ],
        &[],
        w,
    )
}
