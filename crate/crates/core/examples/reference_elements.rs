//! Prints the size and unisolvence defect of every reference element.

use karst_fem::elements::{Family, ReferenceElement};

fn main() {
    println!("{:<6} {:<10} {:>6} {:>9} {:>14}", "family", "shape", "degree", "local dofs", "|V - I|_max");
    for &family in Family::ALL {
        let re = ReferenceElement::get(family);
        println!(
            "{:<6} {:<10} {:>6} {:>9} {:>14.3e}",
            family.name(),
            format!("{:?}", family.shape()),
            family.degree(),
            re.len(),
            re.unisolvence_error()
        );
    }
}
