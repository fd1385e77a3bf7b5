use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use super::{ExactMatrix, MatrixError};

/// Square matrix with entries in `Z/m`, stored reduced into `[0, m)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ResidueMatrix {
    n: usize,
    modulus: u64,
    data: Vec<u64>,
}

impl ResidueMatrix {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.n + j]
    }

    pub fn identity(n: usize, modulus: u64) -> Self {
        let mut data = vec![0; n * n];
        for i in 0..n {
            data[i * n + i] = 1 % modulus;
        }
        Self { n, modulus, data }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, MatrixError> {
        if self.n != other.n || self.modulus != other.modulus {
            return Err(MatrixError::DimensionMismatch {
                left: (self.n, self.n),
                right: (other.n, other.n),
            });
        }
        let n = self.n;
        let m = u128::from(self.modulus);
        let mut data = vec![0u64; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc: u128 = 0;
                for k in 0..n {
                    acc = (acc + u128::from(self.get(i, k)) * u128::from(other.get(k, j))) % m;
                }
                data[i * n + j] = acc as u64;
            }
        }
        Ok(Self {
            n,
            modulus: self.modulus,
            data,
        })
    }
}

/// Reduces an integral matrix entrywise into `[0, m)`.
pub fn reduce_mod(m: &ExactMatrix, modulus: u64) -> Result<ResidueMatrix, MatrixError> {
    m.require_square()?;
    if modulus < 2 {
        return Err(MatrixError::InvalidModulus(modulus));
    }
    let ints = m.to_integer()?;
    let big_mod = BigInt::from(modulus);
    let data = ints
        .entries()
        .iter()
        .map(|x| {
            x.mod_floor(&big_mod)
                .to_u64()
                .expect("residue fits the modulus")
        })
        .collect();
    Ok(ResidueMatrix {
        n: m.rows(),
        modulus,
        data,
    })
}

impl fmt::Display for ResidueMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.n {
            if i > 0 {
                write!(f, ",")?;
            }
            let row: Vec<String> = (0..self.n).map(|j| self.get(i, j).to_string()).collect();
            write!(f, "[{}]", row.join(","))?;
        }
        write!(f, "] mod {}", self.modulus)
    }
}
