#![allow(dead_code)]

use rabuild::building::Building;
use rabuild::coxeter::CoxeterSystem;
use rabuild::graphprod::GraphProduct;

pub fn building(names: &[&str], pairs: &[(&str, &str)], q: Vec<u32>) -> Building {
    let sys = CoxeterSystem::from_names(names, pairs).unwrap();
    Building::new(GraphProduct::new(sys, q).unwrap()).unwrap()
}

pub fn cycle(n: usize, q: Vec<u32>) -> Building {
    let names: Vec<String> = (1..=n).map(|i| format!("s{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let pairs: Vec<(&str, &str)> = (0..n).map(|i| (refs[i], refs[(i + 1) % n])).collect();
    building(&refs, &pairs, q)
}

/// A named system together with the largest radius the suite uses for it.
pub struct Case {
    pub name: &'static str,
    pub building: Building,
    pub radius: usize,
}

pub fn trees() -> Vec<Case> {
    vec![
        Case { name: "dinf-2-3", building: building(&["s", "t"], &[], vec![2, 3]), radius: 3 },
        Case { name: "dinf-3-3", building: building(&["s", "t"], &[], vec![3, 3]), radius: 3 },
        Case { name: "free-2-3-4", building: building(&["a", "b", "c"], &[], vec![2, 3, 4]), radius: 3 },
    ]
}

pub fn square() -> Case {
    Case { name: "square-2-3", building: building(&["s", "t"], &[("s", "t")], vec![2, 3]), radius: 2 }
}

pub fn surfaces() -> Vec<Case> {
    vec![
        Case { name: "hexagon-2", building: cycle(6, vec![2; 6]), radius: 2 },
        Case { name: "hexagon-3", building: cycle(6, vec![3; 6]), radius: 2 },
        Case { name: "pentagon-mixed", building: cycle(5, vec![2, 3, 2, 3, 4]), radius: 2 },
        Case { name: "tree-product", building: cycle(4, vec![3, 3, 2, 2]), radius: 2 },
        Case {
            name: "free-and-edge",
            building: building(&["s1", "s2", "s3"], &[("s2", "s3")], vec![3, 2, 3]),
            radius: 2,
        },
    ]
}

pub fn suite() -> Vec<Case> {
    let mut v = trees();
    v.push(square());
    v.extend(surfaces());
    v
}
