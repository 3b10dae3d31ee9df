// Generated by tests/oracles/bounds_oracle.py (mpmath, 50 digits). Do not edit.
// (n_t, n_c, delta, pdim, growth_log, d2, m, r_t, r_c, delta_t(δ/2), delta_c(δ/2), bound)
const BOUND_CASES: [(usize, usize, f64, usize, f64, f64, f64, f64, f64, f64, f64, f64); 20] = [
    (986, 3751, 0.210699, 13, 15.5298, 4.67935, 1.47619, 0.158908, 0.477918, 0.3943471380415, 1.3180000086610182, 2.6511162052053083),
    (4386, 3116, 0.426136, 6, 58.509, 4.57123, 2.65219, 0.284626, 0.168255, 0.33476601809333795, 1.0846326241059439, 3.6315340302675434),
    (1070, 4829, 0.125847, 15, 56.8779, 4.60638, 2.17403, 0.277135, 0.43912, 0.6754992888601694, 1.261605186439709, 3.697427577075521),
    (3047, 2148, 0.0239383, 10, 33.8051, 1.83781, 1.10078, 0.4143, 0.13148, 0.32251398896616634, 0.9229342430761555, 1.4720007100933705),
    (1699, 739, 0.133628, 4, 38.2062, 3.38965, 1.81081, 0.0272432, 0.319329, 0.4462825958837329, 1.345022816003756, 3.013824911937762),
    (2403, 1216, 0.317136, 2, 15.0893, 2.72708, 1.03577, 0.103869, 0.18904, 0.24694330148100432, 0.8327246935938253, 1.0583132166836766),
    (3417, 3861, 0.343494, 4, 56.1452, 1.37194, 1.85314, 0.405785, 0.269293, 0.37258472702877043, 0.4895688022861558, 1.6592159451685669),
    (2036, 2290, 0.330189, 13, 37.1167, 4.35961, 1.97806, 0.392071, 0.193279, 0.39795267611588847, 1.4902048977068163, 3.7232546622179448),
    (1259, 556, 0.165176, 15, 32.9634, 2.52163, 1.5077, 0.366434, 0.380503, 0.48385259079358145, 1.8547930184658017, 3.3701558070408892),
    (1536, 3192, 0.261015, 3, 40.6883, 2.54366, 2.09971, 0.416552, 0.398283, 0.4793165650158302, 0.6541645574926184, 2.2481942629328255),
    (2667, 4032, 0.0449411, 7, 33.4948, 4.55533, 1.39595, 0.42726, 0.135668, 0.340610379029447, 1.0577325953527597, 2.072975413482685),
    (3637, 2485, 0.233066, 2, 56.7634, 1.0537, 1.06633, 0.244925, 0.0227613, 0.3641911505801758, 0.4088450684598072, 0.6971346371007462),
    (717, 4160, 0.489779, 14, 33.401, 4.9039, 1.41669, 0.336077, 0.181677, 0.6354847921697295, 1.3311284458945472, 2.361913283144346),
    (4369, 2861, 0.182843, 3, 53.9069, 3.54751, 2.91394, 0.287691, 0.0569146, 0.3250028616443054, 0.8051948672370919, 3.1846038439768516),
    (3877, 1707, 0.176727, 12, 38.4754, 2.25953, 2.781, 0.413384, 0.25999, 0.2953966854203687, 1.15366043290564, 4.357950567910584),
    (3875, 693, 0.0595027, 12, 9.0323, 3.66411, 2.67483, 0.14802, 0.16415, 0.1696050828878545, 1.9666258583465877, 5.699463189181203),
    (844, 4737, 0.270735, 12, 57.6988, 4.59795, 2.62385, 0.0277111, 0.407052, 0.7609227146111244, 1.1793959431230328, 4.16260143556337),
    (3651, 1428, 0.178496, 2, 2.14271, 3.24244, 1.18974, 0.433642, 0.0568663, 0.1141372614110509, 0.8694756875646744, 1.5503712376031957),
    (3212, 4612, 0.143699, 11, 31.7619, 2.19884, 1.44307, 0.471058, 0.0805282, 0.298528462304412, 0.8027330678278356, 1.8381696762503148),
    (253, 1388, 0.123986, 10, 47.501, 2.70116, 2.83054, 0.196498, 0.132022, 1.2781907688487564, 1.2781241813966422, 4.174165547777159),
];
// (mean_p, cov_p (row-major), mean_q, cov_q, d2 = exp(KL nats))
const GAUSSIAN_CASES: [([f64; 2], [f64; 4], [f64; 2], [f64; 4], f64); 20] = [
    ([-0.220065, 1.92299], [2.15283, -0.437208, -0.437208, 2.01562], [-0.342529, -0.773818], [0.283998, -0.148001, -0.148001, 1.04923], 655.0550077728299),
    ([0.3594, 1.6951], [2.18444, -0.651082, -0.651082, 1.4269], [0.455131, -1.38458], [0.696631, -0.0486649, -0.0486649, 2.71019], 10.906313713443422),
    ([0.630799, 0.770507], [2.0081, -0.745332, -0.745332, 3.70019], [-0.257595, 0.907756], [1.7914, 0.0853599, 0.0853599, 0.301028], 136.03746086304744),
    ([0.0924971, -1.29163], [3.14216, 0.631029, 0.631029, 3.82916], [-1.91443, -1.79022], [3.37831, 1.18447, 1.18447, 3.08303], 1.9127511376339892),
    ([1.96697, -1.65492], [1.30982, 0.78057, 0.78057, 2.75154], [1.68024, 1.55272], [0.770037, 0.544499, 0.544499, 2.9653], 11.00883723853845),
    ([1.88498, 1.07352], [1.46005, 0.59119, 0.59119, 3.4261], [-0.711582, 1.08119], [3.13561, -1.245, -1.245, 1.24817], 29.973817909355294),
    ([-1.93077, 1.10509], [0.320895, -0.360011, -0.360011, 1.18001], [-0.167928, -1.47756], [0.261164, -0.0106293, -0.0106293, 0.682669], 52090.500730227315),
    ([1.82562, 0.342364], [1.35073, 0.401618, 0.401618, 1.99669], [-0.039388, 0.574471], [1.08213, -0.611934, -0.611934, 2.02409], 8.37181493855063),
    ([-1.10474, -1.03865], [2.05418, -0.739094, -0.739094, 3.95958], [0.00529681, -0.689715], [4.05807, -0.677994, -0.677994, 1.23434], 2.606340349839124),
    ([-0.642252, 1.18345], [4.00624, 1.10329, 1.10329, 1.80633], [-0.979294, -0.869023], [1.81243, 0.505322, 0.505322, 1.07147], 10.683148606849862),
    ([1.44013, 1.49313], [0.677124, 0.52583, 0.52583, 0.68896], [0.13774, -0.298221], [3.07104, 0.659349, 0.659349, 0.383911], 331.61409198333433),
    ([-0.782525, 0.972607], [1.01067, 0.545935, 0.545935, 2.33174], [-1.38546, -0.108381], [0.450173, 0.14852, 0.14852, 3.04752], 2.2080796014620447),
    ([1.05246, 1.87837], [0.538543, -0.280894, -0.280894, 1.02987], [-0.427349, 0.392187], [0.476451, 0.418465, 0.418465, 1.7001], 15.611829587178768),
    ([1.7591, -1.52282], [0.336201, 0.361237, 0.361237, 2.74364], [-0.898618, -0.729504], [3.51547, 1.21577, 1.21577, 4.06318], 8.974329917709783),
    ([1.23635, 1.76296], [1.93559, -0.994031, -0.994031, 4.20224], [1.10902, -1.28683], [0.634063, 0.525204, 0.525204, 1.06146], 125765.34281490235),
    ([1.06528, 0.0722775], [3.18434, -0.335644, -0.335644, 0.764897], [-0.365629, -1.57372], [0.899318, -0.564326, -0.564326, 1.8762], 73.32890438688389),
    ([-1.75106, 1.61521], [0.592972, 0.0938447, 0.0938447, 0.430453], [-0.0430033, 1.10545], [3.15201, -0.728792, -0.728792, 0.768991], 2.7404358919516056),
    ([-0.745905, 0.501646], [1.49467, 0.59709, 0.59709, 1.49833], [1.96575, 0.287992], [0.411563, -0.330621, -0.330621, 1.16393], 437238.2947887357),
    ([-0.836381, -1.83198], [0.922255, -0.381101, -0.381101, 0.977035], [-1.60312, -0.735734], [3.90492, -0.150409, -0.150409, 3.23708], 2.518873424181792),
    ([1.95539, 1.00289], [1.40839, -0.129677, -0.129677, 1.96297], [0.218226, 1.72055], [0.447003, 0.173665, 0.173665, 0.753696], 374.71717523056526),
];
// treatment points, control points (2-D, 6 each), estimate_d2 with MLE covariance + 1e-6 I
const SAMPLE_CASES: [([[f64; 2]; 6], [[f64; 2]; 6], f64); 5] = [
    ([[-0.7914, 0.6235], [-2.182, -0.0411], [-0.5667, -0.6421], [1.203, -0.6488], [-0.2154, 1.12], [-0.2948, -0.3474]], [[1.048, -0.7763], [1.619, -0.1839], [-0.1494, 0.2772], [1.557, 0.0006774], [0.0571, -0.138], [-1.279, 0.6062]], 5.40756471114652),
    ([[0.6847, -0.6065], [1.515, 0.599], [-1.093, -1.107], [-0.1856, 0.06279], [1.591, -0.1995], [-0.6353, 0.1682]], [[0.706, 0.04006], [3.237, -0.456], [-1.269, 0.7447], [0.7198, -1.253], [1.285, -0.9239], [-1.717, -0.4781]], 1.6493558710027099),
    ([[0.7161, 2.836], [-0.5719, 0.6875], [-0.3234, -0.9956], [0.4257, -0.8537], [1.001, 0.9459], [0.388, 0.16]], [[-0.008375, -0.3956], [-1.165, 1.023], [0.3079, -0.9585], [1.443, 0.3467], [1.726, -1.112], [1.261, -1.542]], 7.253815085604895),
    ([[-0.9492, 2.119], [0.9311, 2.797], [0.9981, -0.2275], [-0.43, -1.371], [0.9487, -1.984], [-0.8354, 1.059]], [[1.965, -0.3021], [3.111, 1.082], [1.919, 0.7287], [-1.429, -0.1546], [-0.05505, 0.6747], [0.238, 0.2564]], 1336.4203011288737),
    ([[-0.1595, -0.5478], [1.215, 0.2395], [0.6017, 0.6353], [1.002, 0.1246], [-0.3588, 1.178], [0.2676, -0.1242]], [[0.17, -1.447], [-1.139, -1.033], [0.2102, -0.06372], [0.2164, -1.037], [1.922, -0.1953], [0.5229, -0.6055]], 19.860120616567098),
];
