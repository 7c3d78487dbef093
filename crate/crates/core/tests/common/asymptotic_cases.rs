//! Reference values from `oracles/asymptotics_oracle.py` (mpmath, 50 digits).

pub struct Case {
    pub bbar: f64,
    pub k1: f64,
    pub k2: f64,
    pub alpha: f64,
    pub b: f64,
    pub d_n: f64,
    pub z: f64,
    pub l1: f64,
    pub l2: f64,
}

#[rustfmt::skip]
pub const CASES: [Case; 20] = [
    Case { bbar: 6.44209265468671e-05, k1: 0.761116, k2: 3.665164, alpha: 0.271346, b: 0.00014680131585631474, d_n: 4.4587826323827271586, z: 1.8434014062366863397, l1: 4.8783866512282135447, l2: 3.9166293796217050171 },
    Case { bbar: 0.0012654846151794186, k1: 0.0, k2: 4.386601, alpha: 0.127746, b: 0.00021463058311496836, d_n: 3.4471623000057618675, z: 2.6832994456810444235, l1: 4.1817038317683669393, l2: 4.0379025644689601403 },
    Case { bbar: 5.024489715804343e-06, k1: 0.421914, k2: 4.184566, alpha: 0.078892, b: 3.0552505905452474e-05, d_n: 4.902516173871329584, z: 3.1920150065107173065, l1: 5.5486892984138602923, l2: 4.584613495584512877 },
    Case { bbar: 1.6880929918325704e-05, k1: 0.771227, k2: 3.743277, alpha: 0.136864, b: 4.6622323721172015e-06, d_n: 4.7662781185306364777, z: 2.6092256776281113085, l1: 5.3228370004207683493, l2: 4.8377942213021296392 },
    Case { bbar: 0.0008370597257083751, k1: 0.0, k2: 3.537148, alpha: 0.073616, b: 0.00011872793839329015, d_n: 3.5361124139710398059, z: 3.2640504623981449867, l1: 4.4031802711346860011, l2: 4.3150193184296560012 },
    Case { bbar: 0.006186024225288644, k1: 0.057057, k2: 1.86976, alpha: 0.291736, b: 2.7644100217250136e-06, d_n: 2.3667613741018082955, z: 1.7575366861898564059, l1: 2.917853448381028275, l2: 4.7670742197777554533 },
    Case { bbar: 6.776587118118907e-06, k1: 1.47814, k2: 1.247869, alpha: 0.246051, b: 1.7177640470264357e-05, d_n: 5.0955409757266044673, z: 1.9574697709679244743, l1: 5.4967488230805444386, l2: 4.4297018385084018086 },
    Case { bbar: 1.393528569810414e-05, k1: 0.0, k2: 0.142914, alpha: 0.108437, b: 1.4458806317622908e-06, d_n: 4.2077981445490996338, z: 2.8578923792059694323, l1: 4.8121486239020821418, l2: 5.1137305173632623998 },
    Case { bbar: 2.8058461061587975e-05, k1: 0.0, k2: 1.156896, alpha: 0.122097, b: 2.489740662651196e-05, d_n: 4.2686711279198253791, z: 2.7316835070407965914, l1: 4.8653071321006046434, l2: 4.5232121153648268873 },
    Case { bbar: 6.241596402467441e-06, k1: 1.506674, k2: 2.933169, alpha: 0.226718, b: 0.015300216701336538, d_n: 5.1162317983938851651, z: 2.0513926768651645136, l1: 5.535245213607574936, l2: 2.7049348077299176543 },
    Case { bbar: 6.783584666576482e-05, k1: 0.42965, k2: 3.760895, alpha: 0.286255, b: 1.1102922977008762e-06, d_n: 4.3160642733669525938, z: 1.7801386830050545857, l1: 4.7223569270724565585, l2: 4.9518791063236878839 },
    Case { bbar: 0.0015749579282083898, k1: 0.0, k2: 1.044164, alpha: 0.177172, b: 0.01685752734155201, d_n: 3.1835536300645386381, z: 2.327861406242510206, l1: 3.8315067212686787941, l2: 2.7807863102430054374 },
    Case { bbar: 1.8890034081857633e-06, k1: 1.194133, k2: 4.019893, alpha: 0.082621, b: 1.4347490679962215e-06, d_n: 5.3082991907313982295, z: 3.1438311110836388314, l1: 5.9206430714082553285, l2: 5.1717799780300211671 },
    Case { bbar: 0.0009745598903737865, k1: 0.0, k2: 2.859245, alpha: 0.069731, b: 0.0011377138523321153, d_n: 3.4644330421850936007, z: 3.3203344164571856384, l1: 4.356073568105538236, l2: 3.8191682658146434304 },
    Case { bbar: 3.2572751333091294e-06, k1: 1.226415, k2: 1.440484, alpha: 0.048718, b: 9.562753415944381e-06, d_n: 5.2058804916931161367, z: 3.6899854570174406165, l1: 5.9399354422570234972, l2: 4.9256748690487122435 },
    Case { bbar: 0.002217534993867322, k1: 1.483319, k2: 2.045916, alpha: 0.103541, b: 0.005622779143515319, d_n: 3.7040440415148461212, z: 2.9067811754611756723, l1: 4.5354793061501804151, l2: 3.293416752646001674 },
    Case { bbar: 0.0005622187392080658, k1: 0.481179, k2: 0.708387, alpha: 0.188622, b: 4.488699093849929e-06, d_n: 3.7918475946753481227, z: 2.2584665753825098629, l1: 4.3756190006154976261, l2: 4.7725318796210032172 },
    Case { bbar: 8.127884831731127e-05, k1: 0.0, k2: 4.572477, alpha: 0.242662, b: 1.5946622390914695e-06, d_n: 4.1714612898475761807, z: 1.9734769554265039212, l1: 4.6261837133411421148, l2: 4.9195191438376853209 },
    Case { bbar: 6.0602497472384e-06, k1: 0.857422, k2: 2.402362, alpha: 0.165117, b: 5.306821089846097e-06, d_n: 5.0072256728616589824, z: 2.4053729002978250345, l1: 5.4979391076058970657, l2: 4.7695351551026682875 },
    Case { bbar: 1.6951022363042842e-05, k1: 0.0, k2: 2.372583, alpha: 0.238637, b: 0.00028415574687826276, d_n: 4.4612568333227622405, z: 1.9927317635021100486, l1: 4.8863951113408356784, l2: 3.7940029849207544642 },
];
