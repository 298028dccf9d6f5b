//! Command-line entry point.
//!
//! Exit codes: 0 on success, 1 on solver failure, 2 on usage errors.

use std::path::PathBuf;
use std::process::ExitCode;

use axiscat_cli::{
    run_angular_study, run_flt_accuracy, run_flt_timing, run_radial_study, run_single_solve,
    StudyKind, StudySpec,
};

const USAGE: &str = "\
axiscat - axisymmetric penetrable-body scattering solver

USAGE:
    axiscat --study KIND [OPTIONS]

STUDIES:
    single        one solve; writes a (rho, theta) raster and modal
                  coefficients when --out is given
    radial        N_i sweep at fixed F against the exact reference
    angular       F sweep (hollowed sphere) against a refined self-reference
    flt-accuracy  transform error table (sizes from --F)
    flt-timing    transform timing table (sizes from --F)

OPTIONS:
    --scatterer NAME   sphere | offset-sphere | hollowed | none |
                       tabulated:PATH             [default: sphere]
    --F LIST           angular truncation order(s), comma separated
                       (transform sizes for the flt studies) [default: 255]
    --Ni LIST          radial interval count(s), comma separated [default: 32]
    --Nd N             Chebyshev nodes per interval  [default: 4]
    --k VALUE          wavenumber                    [default: 1]
    --beta VALUE       hollowed-sphere exponent      [default: 2.2]
    --rmax VALUE       domain radius                 [default: 4]
    --tol VALUE        GMRES relative residual       [default: 1e-10]
    --out PATH         write CSV here instead of stdout
    --moment-cache DIR cache moment tables in DIR
    --threads N        worker threads                [default: 1]
    --help             print this text
";

fn parse_usize_list(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|_| format!("bad count {p:?}")))
        .collect()
}

fn parse_args(args: &[String]) -> Result<StudySpec, String> {
    let mut spec = StudySpec::default();
    let mut kind_seen = false;
    let mut it = args.iter();
    while let Some(flag) = it.next() {
        if flag == "--help" || flag == "-h" {
            return Err(String::new());
        }
        let value = it
            .next()
            .ok_or_else(|| format!("flag {flag} needs a value"))?;
        match flag.as_str() {
            "--study" => {
                spec.kind = StudyKind::parse(value).map_err(|e| e.to_string())?;
                kind_seen = true;
            }
            "--scatterer" => spec.scatterer_name = value.clone(),
            "--F" => spec.f_list = parse_usize_list(value)?,
            "--Ni" => spec.ni_list = parse_usize_list(value)?,
            "--Nd" => spec.n_d = value.parse().map_err(|_| format!("bad --Nd {value:?}"))?,
            "--k" => spec.wavenumber = value.parse().map_err(|_| format!("bad --k {value:?}"))?,
            "--beta" => spec.beta = value.parse().map_err(|_| format!("bad --beta {value:?}"))?,
            "--rmax" => spec.r_max = value.parse().map_err(|_| format!("bad --rmax {value:?}"))?,
            "--tol" => spec.tol = value.parse().map_err(|_| format!("bad --tol {value:?}"))?,
            "--out" => spec.out = Some(PathBuf::from(value)),
            "--moment-cache" => spec.moment_cache = Some(PathBuf::from(value)),
            "--threads" => {
                spec.threads = value.parse().map_err(|_| format!("bad --threads {value:?}"))?
            }
            other => return Err(format!("unknown flag {other:?}")),
        }
    }
    if !kind_seen {
        return Err("missing --study".into());
    }
    Ok(spec)
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let spec = match parse_args(&args) {
        Ok(spec) => spec,
        Err(msg) => {
            if msg.is_empty() {
                print!("{USAGE}");
                return ExitCode::SUCCESS;
            }
            eprintln!("error: {msg}");
            eprint!("{USAGE}");
            return ExitCode::from(2);
        }
    };
    // usage-level validation separates exit code 2 from solve failures
    if let Err(e) = spec.validate().and_then(|_| spec.scatterer().map(|_| ())) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let result = match spec.kind {
        StudyKind::Radial => run_radial_study(&spec).map(|_| ()),
        StudyKind::Angular => run_angular_study(&spec).map(|_| ()),
        StudyKind::FltAccuracy => run_flt_accuracy(&spec).map(|_| ()),
        StudyKind::FltTiming => run_flt_timing(&spec).map(|_| ()),
        StudyKind::Single => run_single_solve(&spec).map(|_| ()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
