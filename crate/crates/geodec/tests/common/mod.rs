#![allow(dead_code)]

pub mod checks;

use geodec::ddp::Plant;
use geodec::linalg::from_rows;
use geodec::Matrix;

/// Four states, three inputs, one disturbance, three measurements, one output.
pub fn plant_a() -> Plant {
    Plant {
        a: Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-30.0, 0.0, -1.0, 0.0])),
        b: from_rows(&[
            &[0.0, 1.0, 0.0],
            &[10.0, 0.0, 0.0],
            &[0.0, 13.0, -1.0],
            &[0.0, 0.0, 1.0],
        ]),
        h: from_rows(&[&[-1.0], &[0.0], &[0.0], &[-1.0]]),
        c: from_rows(&[
            &[0.0, -1.0, 0.0, -1.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[-14.0, 0.0, 0.0, 1.0],
        ]),
        d_y: from_rows(&[&[-11.0, 0.0, 0.0], &[-1.0, 13.0, -5.0], &[0.0, 0.0, -1.0]]),
        g_y: from_rows(&[&[-5.0], &[-1.0], &[0.0]]),
        e: from_rows(&[&[0.0, 0.0, 0.0, -20.0]]),
        d_z: from_rows(&[&[0.0, 0.0, -1.0]]),
        g_z: from_rows(&[&[1.0]]),
    }
    .validated()
    .unwrap()
}

/// Four states, three inputs, two disturbances, two measurements, one output.
pub fn plant_b() -> Plant {
    Plant {
        a: from_rows(&[
            &[-1.0, 0.0, 0.0, 0.0],
            &[7.0, 0.0, -6.0, 0.0],
            &[0.0, -2.0, 0.0, 0.0],
            &[0.0, 0.0, -9.0, 0.0],
        ]),
        b: from_rows(&[
            &[-9.0, 0.0, 0.0],
            &[-1.0, 1.0, 10.0],
            &[0.0, 0.0, 0.0],
            &[0.0, -6.0, 0.0],
        ]),
        h: from_rows(&[&[0.0, 0.0], &[-8.0, 0.0], &[0.0, 7.0], &[0.0, 3.0]]),
        c: from_rows(&[&[0.0, 8.0, 1.0, -10.0], &[0.0, 0.0, 8.0, -1.0]]),
        d_y: from_rows(&[&[-5.0, 0.0, 0.0], &[0.0, -1.0, -2.0]]),
        g_y: from_rows(&[&[0.0, 2.0], &[0.0, 0.0]]),
        e: from_rows(&[&[29.0, 0.0, 0.0, 0.0]]),
        d_z: from_rows(&[&[-9.0, 0.0, 0.0]]),
        g_z: from_rows(&[&[0.0, 0.0]]),
    }
    .validated()
    .unwrap()
}

/// Two states with a biproper measurement and controlled output.
pub fn biproper() -> Plant {
    Plant {
        a: from_rows(&[&[0.0, 0.0], &[0.0, -1.0]]),
        b: from_rows(&[&[1.0], &[0.0]]),
        h: from_rows(&[&[1.0], &[1.0]]),
        c: from_rows(&[&[1.0, 0.0]]),
        d_y: from_rows(&[&[0.0]]),
        g_y: from_rows(&[&[-1.0]]),
        e: from_rows(&[&[0.0, 1.0]]),
        d_z: from_rows(&[&[1.0]]),
        g_z: from_rows(&[&[-1.0]]),
    }
    .validated()
    .unwrap()
}
