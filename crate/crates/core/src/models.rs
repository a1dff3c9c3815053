//! System Hamiltonians, coupling operators and initial states.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result, C64};

const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    pub hamiltonian: DMatrix<C64>,
    /// Coupling operator `f` multiplying the bath coordinate.
    pub coupling: DMatrix<C64>,
    pub psi0: DVector<C64>,
}

fn real_matrix(rows: [[f64; 2]; 2]) -> DMatrix<C64> {
    DMatrix::from_fn(2, 2, |i, j| C64::from(rows[i][j]))
}

fn is_hermitian(m: &DMatrix<C64>) -> bool {
    m.is_square() && (m - m.adjoint()).iter().all(|z| z.norm() <= HERMITIAN_TOL * (1.0 + m.norm()))
}

impl SystemModel {
    pub fn new(hamiltonian: DMatrix<C64>, coupling: DMatrix<C64>, psi0: DVector<C64>) -> Result<Self> {
        let d = psi0.len();
        if hamiltonian.shape() != (d, d) || coupling.shape() != (d, d) {
            return Err(Error::Dimension(format!(
                "system dimension {d} does not match H {:?} and f {:?}",
                hamiltonian.shape(),
                coupling.shape()
            )));
        }
        if !is_hermitian(&hamiltonian) {
            return Err(Error::InvalidParameter("system Hamiltonian is not Hermitian".into()));
        }
        if !is_hermitian(&coupling) {
            return Err(Error::InvalidParameter("coupling operator is not Hermitian".into()));
        }
        if (psi0.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "initial state has norm {}",
                psi0.norm()
            )));
        }
        Ok(Self {
            hamiltonian,
            coupling,
            psi0,
        })
    }

    pub fn dim(&self) -> usize {
        self.psi0.len()
    }

    /// `H = eps sz + delta sx`, `f = sz`, `psi0 = |1>`.
    pub fn spin_boson(bias: f64, tunneling: f64) -> Self {
        Self::new(
            real_matrix([[bias, tunneling], [tunneling, -bias]]),
            real_matrix([[1.0, 0.0], [0.0, -1.0]]),
            DVector::from_vec(vec![C64::from(1.0), C64::from(0.0)]),
        )
        .expect("spin-boson model is Hermitian")
    }

    /// Donor/acceptor pair `H = E_D |D><D| + (E_A + lambda) |A><A| + J (|D><A| + h.c.)`,
    /// starting in `|D>`.
    pub fn transfer(
        donor: f64,
        acceptor: f64,
        reorganization: f64,
        hopping: f64,
        coupling: TransferCoupling,
    ) -> Self {
        Self::new(
            real_matrix([[donor, hopping], [hopping, acceptor + reorganization]]),
            coupling.operator(),
            DVector::from_vec(vec![C64::from(1.0), C64::from(0.0)]),
        )
        .expect("transfer model is Hermitian")
    }
}

/// Which operator couples the transfer model to its bath.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransferCoupling {
    /// `|A><A|`
    #[default]
    Acceptor,
    /// `diag(1, -1)`
    SigmaZ,
    /// `-|A><A|`
    NegAcceptor,
}

impl TransferCoupling {
    pub fn operator(self) -> DMatrix<C64> {
        match self {
            Self::Acceptor => real_matrix([[0.0, 0.0], [0.0, 1.0]]),
            Self::SigmaZ => real_matrix([[1.0, 0.0], [0.0, -1.0]]),
            Self::NegAcceptor => real_matrix([[0.0, 0.0], [0.0, -1.0]]),
        }
    }
}
