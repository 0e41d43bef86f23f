//! Internal coordinates of the peptide backbone.

use nalgebra::Vector3;

use super::ProteinError;

pub type Vec3 = Vector3<f64>;

/// Backbone dihedrals of one residue, in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DihedralTriple {
    pub phi: f64,
    pub psi: f64,
    pub omega: f64,
}

impl DihedralTriple {
    pub fn new(phi: f64, psi: f64, omega: f64) -> Self {
        Self { phi: wrap_degrees(phi), psi: wrap_degrees(psi), omega: wrap_degrees(omega) }
    }
}

/// Maps an angle into (-180, 180].
pub fn wrap_degrees(a: f64) -> f64 {
    let r = (a + 180.0).rem_euclid(360.0) - 180.0;
    if r == -180.0 {
        180.0
    } else {
        r
    }
}

/// Fixed bond lengths (Å) and bond angles (degrees).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackboneGeometry {
    pub n_ca: f64,
    pub ca_c: f64,
    pub c_n: f64,
    pub c_o: f64,
    /// N-Cα-C.
    pub angle_n_ca_c: f64,
    /// Cα-C-N.
    pub angle_ca_c_n: f64,
    /// C-N-Cα.
    pub angle_c_n_ca: f64,
    /// Cα-C=O.
    pub angle_ca_c_o: f64,
}

impl Default for BackboneGeometry {
    fn default() -> Self {
        Self {
            n_ca: 1.458,
            ca_c: 1.525,
            c_n: 1.329,
            c_o: 1.231,
            angle_n_ca_c: 111.2,
            angle_ca_c_n: 116.2,
            angle_c_n_ca: 121.7,
            angle_ca_c_o: 120.5,
        }
    }
}

impl BackboneGeometry {
    pub fn validate(&self) -> Result<(), ProteinError> {
        for (name, v) in [("N-CA", self.n_ca), ("CA-C", self.ca_c), ("C-N", self.c_n), ("C=O", self.c_o)] {
            if !(v > 0.8 && v < 2.0) {
                return Err(ProteinError::Geometry(format!("bond {name} = {v} Å outside (0.8, 2.0)")));
            }
        }
        for (name, v) in [
            ("N-CA-C", self.angle_n_ca_c),
            ("CA-C-N", self.angle_ca_c_n),
            ("C-N-CA", self.angle_c_n_ca),
            ("CA-C-O", self.angle_ca_c_o),
        ] {
            if !(v > 90.0 && v < 180.0) {
                return Err(ProteinError::Geometry(format!("angle {name} = {v}° outside (90, 180)")));
            }
        }
        Ok(())
    }

    /// Cα–Cα distance across one peptide bond with the given ω, measured by
    /// placing the atoms.
    pub fn ca_ca_span(&self, omega: f64) -> f64 {
        let n = Vec3::zeros();
        let ca = Vec3::new(self.n_ca, 0.0, 0.0);
        let a = (180.0 - self.angle_n_ca_c).to_radians();
        let c = ca + self.ca_c * Vec3::new(a.cos(), a.sin(), 0.0);
        let n1 = place_atom(&n, &ca, &c, self.c_n, self.angle_ca_c_n, 0.0).expect("reference frame");
        let ca1 = place_atom(&ca, &c, &n1, self.n_ca, self.angle_c_n_ca, omega).expect("reference frame");
        (ca1 - ca).norm()
    }

    /// C_t–Cα_{t+1} distance, which no dihedral changes.
    pub fn c_ca_span(&self) -> f64 {
        let a = self.c_n;
        let b = self.n_ca;
        let g = self.angle_c_n_ca.to_radians();
        (a * a + b * b - 2.0 * a * b * g.cos()).sqrt()
    }
}

/// Places `d` so that `|cd| = bond`, the angle b-c-d is `angle` and the
/// dihedral a-b-c-d is `torsion` (degrees).
pub fn place_atom(a: &Vec3, b: &Vec3, c: &Vec3, bond: f64, angle: f64, torsion: f64) -> Result<Vec3, ProteinError> {
    let bc = c - b;
    let bc_len = bc.norm();
    let ab = b - a;
    let normal = ab.cross(&bc);
    let scale = ab.norm() * bc_len;
    if bc_len == 0.0 || normal.norm() <= 1e-9 * scale {
        return Err(ProteinError::DegenerateFrame);
    }
    let bc = bc / bc_len;
    let n = normal.normalize();
    let m = n.cross(&bc);
    let (theta, tau) = (angle.to_radians(), torsion.to_radians());
    let local = Vec3::new(-bond * theta.cos(), bond * theta.sin() * tau.cos(), bond * theta.sin() * tau.sin());
    Ok(c + bc * local.x + m * local.y + n * local.z)
}

/// Dihedral a-b-c-d in degrees, in (-180, 180].
pub fn dihedral(a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> f64 {
    let b0 = a - b;
    let b1 = c - b;
    let b2 = d - c;
    let b1n = b1.normalize();
    let v = b0 - b1n * b0.dot(&b1n);
    let w = b2 - b1n * b2.dot(&b1n);
    let x = v.dot(&w);
    let y = b1n.cross(&v).dot(&w);
    wrap_degrees(y.atan2(x).to_degrees())
}

/// Bond angle a-b-c in degrees.
pub fn bond_angle(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let u = a - b;
    let v = c - b;
    (u.dot(&v) / (u.norm() * v.norm())).clamp(-1.0, 1.0).acos().to_degrees()
}

/// Atoms placed by one step: `C_t`, `O_t`, `N_{t+1}`, `Cα_{t+1}`.
pub const C: usize = 0;
pub const O: usize = 1;
pub const N_NEXT: usize = 2;
pub const CA_NEXT: usize = 3;

/// Extends the backbone from the frame `(C_{t-1}, N_t, Cα_t)`.
pub fn place_next_backbone(
    frame: &[Vec3; 3],
    triple: &DihedralTriple,
    geom: &BackboneGeometry,
) -> Result<[Vec3; 4], ProteinError> {
    let [c_prev, n, ca] = frame;
    let c = place_atom(c_prev, n, ca, geom.ca_c, geom.angle_n_ca_c, triple.phi)?;
    let n_next = place_atom(n, ca, &c, geom.c_n, geom.angle_ca_c_n, triple.psi)?;
    let ca_next = place_atom(ca, &c, &n_next, geom.n_ca, geom.angle_c_n_ca, triple.omega)?;
    // O lies in the peptide plane, opposite N_{t+1} about the Cα-C axis.
    let o = place_atom(n, ca, &c, geom.c_o, geom.angle_ca_c_o, triple.psi + 180.0)?;
    Ok([c, o, n_next, ca_next])
}

/// Recovers `(φ_t, ψ_t, ω_t)` from the frame and the placed atoms.
pub fn measure_triple(frame: &[Vec3; 3], placed: &[Vec3; 4]) -> DihedralTriple {
    let [c_prev, n, ca] = frame;
    DihedralTriple {
        phi: dihedral(c_prev, n, ca, &placed[C]),
        psi: dihedral(n, ca, &placed[C], &placed[N_NEXT]),
        omega: dihedral(ca, &placed[C], &placed[N_NEXT], &placed[CA_NEXT]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame() -> [Vec3; 3] {
        [Vec3::new(-1.2, 1.1, 0.3), Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.458, 0.0, 0.0)]
    }

    #[test]
    fn wrapping() {
        assert_eq!(wrap_degrees(-180.0), 180.0);
        assert_eq!(wrap_degrees(540.0), 180.0);
        assert_eq!(wrap_degrees(181.0), -179.0);
        assert_eq!(wrap_degrees(-60.0), -60.0);
    }

    #[test]
    fn placed_atoms_have_requested_internals() {
        let g = BackboneGeometry::default();
        let f = frame();
        let t = DihedralTriple::new(-63.0, -41.0, 178.0);
        let p = place_next_backbone(&f, &t, &g).unwrap();
        assert!(((p[C] - f[2]).norm() - g.ca_c).abs() < 1e-12);
        assert!(((p[N_NEXT] - p[C]).norm() - g.c_n).abs() < 1e-12);
        assert!(((p[CA_NEXT] - p[N_NEXT]).norm() - g.n_ca).abs() < 1e-12);
        assert!(((p[O] - p[C]).norm() - g.c_o).abs() < 1e-12);
        assert!((bond_angle(&f[1], &f[2], &p[C]) - g.angle_n_ca_c).abs() < 1e-9);
        assert!((bond_angle(&p[C], &p[N_NEXT], &p[CA_NEXT]) - g.angle_c_n_ca).abs() < 1e-9);
        // Planar peptide: O, C, N_{t+1}, Cα_t are coplanar.
        assert!(dihedral(&p[O], &f[2], &p[C], &p[N_NEXT]).abs() > 179.999);
        let m = measure_triple(&f, &p);
        assert!((m.phi - t.phi).abs() < 1e-9 && (m.psi - t.psi).abs() < 1e-9 && (m.omega - t.omega).abs() < 1e-9);
    }

    #[test]
    fn collinear_frame_is_rejected() {
        let f = [Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), Vec3::new(2.0, 0.0, 0.0)];
        let t = DihedralTriple::new(0.0, 0.0, 180.0);
        assert_eq!(place_next_backbone(&f, &t, &BackboneGeometry::default()), Err(ProteinError::DegenerateFrame));
    }

    #[test]
    fn geometry_validation() {
        assert!(BackboneGeometry::default().validate().is_ok());
        let g = BackboneGeometry { c_n: 2.5, ..Default::default() };
        assert!(g.validate().is_err());
    }
}
