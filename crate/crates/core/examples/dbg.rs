use patchdyn_core::dynamics::*;
use patchdyn_core::model::*;
use patchdyn_core::test_support::fig1_params;

fn main() {
    let mut params = fig1_params();
    params.rho1 = 0.0;
    params.rho2 = 0.0;
    let traj = integrate(&params, &State4::new(3.0, 2.0, 1.5, 4.0), 1500.0, Tolerances::default()).unwrap();
    for t in [50.0, 100.0, 200.0, 400.0, 800.0, 1000.0, 1200.0, 1499.0] {
        let i = traj.window_start(t).min(traj.times.len()-1);
        let s = traj.states[i];
        println!("t={:7.1}  dx1={:11.3e} dy1={:11.3e} dx2={:11.3e} dy2={:11.3e}",
            traj.times[i], s.x1-4.0, s.y1-4.0, s.x2-2.0, s.y2-10.0);
    }
    // step sizes near the end
    let n = traj.times.len();
    println!("last steps: {:?}", &traj.times[n-4..].iter().zip(traj.times[n-5..].iter()).map(|(a,b)| a-b).collect::<Vec<_>>());
    println!("accepted {} rejected {}", traj.accepted, traj.rejected);
}
