//! `ROMAS1` single-file model archive, little-endian.
//!
//! Layout (version 1): 6 magic bytes `ROMAS1`, `u32` version, tool version
//! string, training metadata, configuration echo, parameter space, POD basis
//! (modes as an embedded `RSNP1` block), then one payload per coefficient
//! regressor. Strings are `u64` length plus UTF-8 bytes; float vectors are
//! `u64` length plus `f64` values. All stored floats are exact `f64` bits,
//! so a loaded model predicts bit-identically to the saved one.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::active_subspace::{ActiveSubspace, AsRidgeModel, GradientProvenance};
use crate::error::{Error, Result};
use crate::param_space::ParameterSpace;
use crate::pod::{PodBasis, Truncation};
use crate::regression::gpr::{GpHyper, GpModel1d};
use crate::regression::rbf::{RbfInterpolant, RbfKernel};
use crate::rom::{
    CoefficientMethod, CoefficientRegressor, GradientKind, RomConfig, RomModel, TrainingMeta,
};
use crate::scalar::{to_f64, Real};

pub const MAGIC: &[u8; 6] = b"ROMAS1";
pub const VERSION: u32 = 1;

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

struct Writer<W: Write> {
    inner: W,
}

impl<W: Write> Writer<W> {
    fn u8(&mut self, v: u8) -> std::io::Result<()> {
        self.inner.write_all(&[v])
    }
    fn u32(&mut self, v: u32) -> std::io::Result<()> {
        self.inner.write_all(&v.to_le_bytes())
    }
    fn u64(&mut self, v: u64) -> std::io::Result<()> {
        self.inner.write_all(&v.to_le_bytes())
    }
    fn f64(&mut self, v: f64) -> std::io::Result<()> {
        self.inner.write_all(&v.to_le_bytes())
    }
    fn string(&mut self, s: &str) -> std::io::Result<()> {
        self.u64(s.len() as u64)?;
        self.inner.write_all(s.as_bytes())
    }
    fn vector<T: Real>(&mut self, v: &DVector<T>) -> std::io::Result<()> {
        self.u64(v.len() as u64)?;
        for &x in v.iter() {
            self.f64(to_f64(x))?;
        }
        Ok(())
    }
    fn matrix<T: Real>(&mut self, m: &DMatrix<T>) -> std::io::Result<()> {
        super::rsnp::write_matrix(&mut self.inner, m)
    }
}

struct Reader<R: Read> {
    inner: R,
    offset: usize,
    path: String,
}

impl<R: Read> Reader<R> {
    fn fail(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line: 0,
            column: self.offset,
            message: message.into(),
        }
    }
    fn bytes(&mut self, buf: &mut [u8]) -> Result<()> {
        self.inner.read_exact(buf).map_err(|e| Error::Io {
            path: self.path.clone(),
            source: e,
        })?;
        self.offset += buf.len();
        Ok(())
    }
    fn u8(&mut self) -> Result<u8> {
        let mut b = [0u8; 1];
        self.bytes(&mut b)?;
        Ok(b[0])
    }
    fn u32(&mut self) -> Result<u32> {
        let mut b = [0u8; 4];
        self.bytes(&mut b)?;
        Ok(u32::from_le_bytes(b))
    }
    fn u64(&mut self) -> Result<u64> {
        let mut b = [0u8; 8];
        self.bytes(&mut b)?;
        Ok(u64::from_le_bytes(b))
    }
    fn f64(&mut self) -> Result<f64> {
        let mut b = [0u8; 8];
        self.bytes(&mut b)?;
        Ok(f64::from_le_bytes(b))
    }
    fn string(&mut self) -> Result<String> {
        let len = self.u64()? as usize;
        if len > 1 << 20 {
            return Err(self.fail("unreasonable string length"));
        }
        let mut buf = vec![0u8; len];
        self.bytes(&mut buf)?;
        String::from_utf8(buf).map_err(|_| self.fail("string is not UTF-8"))
    }
    fn vector(&mut self) -> Result<DVector<f64>> {
        let len = self.u64()? as usize;
        if len > 1 << 32 {
            return Err(self.fail("unreasonable vector length"));
        }
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            data.push(self.f64()?);
        }
        Ok(DVector::from_vec(data))
    }
    fn matrix(&mut self) -> Result<DMatrix<f64>> {
        let start = self.offset;
        let result = super::rsnp::read_matrix(&mut self.inner).map_err(|e| Error::Io {
            path: self.path.clone(),
            source: e,
        })?;
        match result {
            Ok(m) => {
                self.offset = start + 21 + 8 * m.len();
                Ok(m)
            }
            Err(msg) => Err(self.fail(msg)),
        }
    }
}

fn kernel_tag<T: Real>(kernel: &RbfKernel<T>) -> (u8, f64) {
    match kernel {
        RbfKernel::ThinPlateSpline => (0, 0.0),
        RbfKernel::Gaussian { shape } => (1, to_f64(*shape)),
        RbfKernel::Multiquadric { shape } => (2, to_f64(*shape)),
    }
}

fn kernel_from_tag(tag: u8, shape: f64) -> Option<RbfKernel<f64>> {
    match tag {
        0 => Some(RbfKernel::ThinPlateSpline),
        1 => Some(RbfKernel::Gaussian { shape }),
        2 => Some(RbfKernel::Multiquadric { shape }),
        _ => None,
    }
}

fn gradient_tag(kind: GradientKind) -> u8 {
    match kind {
        GradientKind::Analytic => 0,
        GradientKind::LocalLinear => 1,
        GradientKind::GlobalLinear => 2,
    }
}

fn gradient_from_tag(tag: u8) -> Option<GradientKind> {
    match tag {
        0 => Some(GradientKind::Analytic),
        1 => Some(GradientKind::LocalLinear),
        2 => Some(GradientKind::GlobalLinear),
        _ => None,
    }
}

/// Saves a trained model.
pub fn save_model<T: Real>(path: &Path, model: &RomModel<T>) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = Writer {
        inner: BufWriter::new(file),
    };
    write_model(&mut w, model).map_err(|e| io_err(path, e))?;
    w.inner.flush().map_err(|e| io_err(path, e))
}

fn write_model<T: Real, W: Write>(w: &mut Writer<W>, model: &RomModel<T>) -> std::io::Result<()> {
    w.inner.write_all(MAGIC)?;
    w.u32(VERSION)?;
    w.string(env!("CARGO_PKG_VERSION"))?;

    let meta = model.meta();
    w.u8(meta.seed.is_some() as u8)?;
    w.u64(meta.seed.unwrap_or(0))?;
    w.u64(meta.n_train as u64)?;

    let config = model.config();
    match config.truncation {
        Truncation::FixedRank(k) => {
            w.u8(0)?;
            w.u64(k as u64)?;
        }
        Truncation::EnergyFraction(tau) => {
            w.u8(1)?;
            w.f64(to_f64(tau))?;
        }
    }
    match &config.method {
        CoefficientMethod::FullRbf(kernel) => {
            w.u8(0)?;
            let (tag, shape) = kernel_tag(kernel);
            w.u8(tag)?;
            w.f64(shape)?;
        }
        CoefficientMethod::AsGpr(kind) => {
            w.u8(1)?;
            w.u8(gradient_tag(*kind))?;
        }
    }
    w.u8(config.centering as u8)?;

    let space = model.space();
    w.u64(space.dim() as u64)?;
    for i in 0..space.dim() {
        w.f64(to_f64(space.lower()[i]))?;
    }
    for i in 0..space.dim() {
        w.f64(to_f64(space.upper()[i]))?;
    }

    let basis = model.basis();
    match basis.mean() {
        Some(mean) => {
            w.u8(1)?;
            w.vector(mean)?;
        }
        None => w.u8(0)?,
    }
    w.matrix(basis.modes())?;
    w.vector(basis.singular_values())?;

    w.u64(model.regressors().len() as u64)?;
    for regressor in model.regressors() {
        match regressor {
            CoefficientRegressor::FullRbf(rbf) => {
                w.u8(0)?;
                let (tag, shape) = kernel_tag(&rbf.kernel());
                w.u8(tag)?;
                w.f64(shape)?;
                w.matrix(rbf.centers())?;
                w.vector(rbf.weights())?;
                w.vector(rbf.tail())?;
            }
            CoefficientRegressor::AsGpr(ridge) => {
                w.u8(1)?;
                let subspace = ridge.subspace();
                w.vector(subspace.eigenvalues())?;
                w.matrix(subspace.eigenvectors())?;
                w.u64(subspace.active_dim() as u64)?;
                match ridge.provenance() {
                    GradientProvenance::Analytic => {
                        w.u8(0)?;
                        w.u64(0)?;
                        w.u64(0)?;
                    }
                    GradientProvenance::LocalLinear {
                        neighbors,
                        fallbacks,
                    } => {
                        w.u8(1)?;
                        w.u64(neighbors as u64)?;
                        w.u64(fallbacks as u64)?;
                    }
                    GradientProvenance::GlobalLinear => {
                        w.u8(2)?;
                        w.u64(0)?;
                        w.u64(0)?;
                    }
                }
                let gp = ridge.response();
                w.vector(gp.train_x())?;
                w.vector(gp.centered_y())?;
                w.f64(to_f64(gp.y_mean()))?;
                let hyper = gp.hyper();
                w.f64(to_f64(hyper.lengthscale))?;
                w.f64(to_f64(hyper.signal_variance))?;
                w.f64(to_f64(hyper.noise_variance))?;
            }
        }
    }
    Ok(())
}

/// Loads a model archive. Archives always hold `f64` payloads.
pub fn load_model(path: &Path) -> Result<RomModel<f64>> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut r = Reader {
        inner: BufReader::new(file),
        offset: 0,
        path: path.display().to_string(),
    };

    let mut magic = [0u8; 6];
    r.bytes(&mut magic)?;
    if &magic != MAGIC {
        return Err(r.fail("bad magic; expected ROMAS1"));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(r.fail(format!("unsupported archive version {version}")));
    }
    let _tool_version = r.string()?;

    let has_seed = r.u8()? != 0;
    let seed_value = r.u64()?;
    let n_train = r.u64()? as usize;
    let meta = TrainingMeta {
        n_train,
        seed: has_seed.then_some(seed_value),
    };

    let truncation = match r.u8()? {
        0 => Truncation::FixedRank(r.u64()? as usize),
        1 => Truncation::EnergyFraction(r.f64()?),
        t => return Err(r.fail(format!("unknown truncation tag {t}"))),
    };
    let method = match r.u8()? {
        0 => {
            let tag = r.u8()?;
            let shape = r.f64()?;
            let kernel =
                kernel_from_tag(tag, shape).ok_or_else(|| r.fail("unknown kernel tag"))?;
            CoefficientMethod::FullRbf(kernel)
        }
        1 => {
            let tag = r.u8()?;
            let kind =
                gradient_from_tag(tag).ok_or_else(|| r.fail("unknown gradient tag"))?;
            CoefficientMethod::AsGpr(kind)
        }
        t => return Err(r.fail(format!("unknown method tag {t}"))),
    };
    let centering = r.u8()? != 0;
    let config = RomConfig {
        truncation,
        method,
        centering,
    };

    let p = r.u64()? as usize;
    let mut lower = Vec::with_capacity(p);
    for _ in 0..p {
        lower.push(r.f64()?);
    }
    let mut upper = Vec::with_capacity(p);
    for _ in 0..p {
        upper.push(r.f64()?);
    }
    let space = ParameterSpace::new(lower, upper)?;

    let mean = if r.u8()? != 0 {
        Some(r.vector()?)
    } else {
        None
    };
    let modes = r.matrix()?;
    let singular_values = r.vector()?;
    let basis = PodBasis::from_parts(modes, singular_values, mean)?;

    let count = r.u64()? as usize;
    let mut regressors = Vec::with_capacity(count);
    for _ in 0..count {
        match r.u8()? {
            0 => {
                let tag = r.u8()?;
                let shape = r.f64()?;
                let kernel =
                    kernel_from_tag(tag, shape).ok_or_else(|| r.fail("unknown kernel tag"))?;
                let centers = r.matrix()?;
                let weights = r.vector()?;
                let tail = r.vector()?;
                regressors.push(CoefficientRegressor::FullRbf(RbfInterpolant::from_parts(
                    kernel, centers, weights, tail,
                )?));
            }
            1 => {
                let eigenvalues = r.vector()?;
                let eigenvectors = r.matrix()?;
                let active_dim = r.u64()? as usize;
                let provenance = match r.u8()? {
                    0 => {
                        r.u64()?;
                        r.u64()?;
                        GradientProvenance::Analytic
                    }
                    1 => {
                        let neighbors = r.u64()? as usize;
                        let fallbacks = r.u64()? as usize;
                        GradientProvenance::LocalLinear {
                            neighbors,
                            fallbacks,
                        }
                    }
                    2 => {
                        r.u64()?;
                        r.u64()?;
                        GradientProvenance::GlobalLinear
                    }
                    t => return Err(r.fail(format!("unknown provenance tag {t}"))),
                };
                let subspace = ActiveSubspace::new(eigenvalues, eigenvectors, active_dim)?;
                let train_x = r.vector()?;
                let centered_y = r.vector()?;
                let y_mean = r.f64()?;
                let hyper = GpHyper {
                    lengthscale: r.f64()?,
                    signal_variance: r.f64()?,
                    noise_variance: r.f64()?,
                };
                let response = GpModel1d::from_parts(train_x, centered_y, y_mean, hyper)?;
                regressors.push(CoefficientRegressor::AsGpr(AsRidgeModel::from_parts(
                    subspace, response, provenance,
                )?));
            }
            t => return Err(r.fail(format!("unknown regressor tag {t}"))),
        }
    }

    RomModel::from_parts(space, basis, regressors, config, meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::{make_ridge_problem, snapshot_from_problem};
    use crate::rom;

    fn trained_model(method: CoefficientMethod<f64>) -> (RomModel<f64>, ParameterSpace<f64>) {
        let space = ParameterSpace::hypercube(2.0, 3.0, 3).unwrap();
        let problem = make_ridge_problem(space.clone(), 25, 3, 51).unwrap();
        let samples = space.sample_uniform(40, 9).unwrap();
        let snapshots = snapshot_from_problem(&problem, &samples).unwrap();
        let config = RomConfig {
            truncation: Truncation::FixedRank(3),
            method,
            centering: false,
        };
        let model = rom::train(&space, &snapshots, &config, Some(9)).unwrap();
        (model, space)
    }

    #[test]
    fn round_trip_full_rbf_predicts_bitwise() {
        let (model, space) = trained_model(CoefficientMethod::FullRbf(
            RbfKernel::ThinPlateSpline,
        ));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.romas");
        save_model(&path, &model).unwrap();
        let loaded = load_model(&path).unwrap();

        assert_eq!(loaded.meta(), model.meta());
        assert_eq!(loaded.rank(), model.rank());
        let probes = space.sample_uniform(7, 77).unwrap();
        for j in 0..7 {
            let a = model.predict(probes.column(j)).unwrap().field;
            let b = loaded.predict(probes.column(j)).unwrap().field;
            assert_eq!(a, b, "probe {j} differs");
        }
    }

    #[test]
    fn round_trip_as_gpr_predicts_bitwise() {
        let (model, space) = trained_model(CoefficientMethod::AsGpr(GradientKind::LocalLinear));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.romas");
        save_model(&path, &model).unwrap();
        let loaded = load_model(&path).unwrap();
        let probes = space.sample_uniform(7, 78).unwrap();
        for j in 0..7 {
            let a = model.predict(probes.column(j)).unwrap().field;
            let b = loaded.predict(probes.column(j)).unwrap().field;
            assert_eq!(a, b, "probe {j} differs");
        }
    }

    #[test]
    fn truncated_archive_fails_cleanly() {
        let (model, _) = trained_model(CoefficientMethod::FullRbf(RbfKernel::ThinPlateSpline));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.romas");
        save_model(&path, &model).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let cut = dir.path().join("cut.romas");
        std::fs::write(&cut, &bytes[..bytes.len() / 2]).unwrap();
        assert!(load_model(&cut).is_err());
    }

    #[test]
    fn wrong_magic_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.romas");
        std::fs::write(&path, b"NOTROM____").unwrap();
        assert!(matches!(load_model(&path), Err(Error::Parse { .. })));
    }
}
