"""Independent reference values frozen into the C++ tests.

Every number here is computed from closed forms or adaptive mpmath
quadrature of the continuum integrals, never from the C++ code.
Run: python3 tests/oracles/oracles.py
"""
import mpmath as mp

mp.mp.dps = 30
pi = mp.pi


def W(u):
    return (1 - u * u) ** 2


def Hs(u):
    if u <= -1:
        return mp.mpf(1)
    if u >= 1:
        return mp.mpf(2)
    return mp.mpf(3) / 2 + (15 * u - 10 * u**3 + 3 * u**5) / 16


def report(name, value):
    print(f"{name:40s} {mp.nstr(value, 17)}")


# line tension constants
sigma = mp.quad(lambda u: 2 * mp.sqrt(W(u)), [-1, 0, 1])
report("sigma_quartic", sigma)
report("sigma_hat_quartic", 2 * mp.sqrt(W(0)))
Wa = lambda u: (1 - u * u) ** 2 * (2 - u) / 2
report("sigma_plus_asym", mp.quad(lambda u: 2 * mp.sqrt(Wa(u)), [0, 1]))
report("sigma_minus_asym", mp.quad(lambda u: 2 * mp.sqrt(Wa(u)), [-1, 0]))
report("Hs(0)", Hs(mp.mpf(0)))
report("Hs'(0)", mp.diff(lambda u: Hs(u), 0))

# unit sphere as a surface of revolution, gamma(t) = (-cos t, sin t)
area = mp.quad(lambda t: 2 * pi * mp.sin(t), [0, pi])
report("sphere_area", area)
report("sphere_int_H2", mp.quad(lambda t: 4 * 2 * pi * mp.sin(t), [0, pi]))
report("sphere_int_K", mp.quad(lambda t: 1 * 2 * pi * mp.sin(t), [0, pi]))
report("sphere_volume", mp.quad(lambda t: pi * mp.sin(t) ** 2 * mp.sin(t), [0, pi]))

# capped cylinder initial data
report("capped_cylinder_length", 3 + pi / 2)
report("capped_cylinder_area", 2 * pi * mp.mpf(1) / 2 * 3 + 4 * pi * mp.mpf(1) / 4)


def u0(x):
    if x <= mp.mpf(-5) / 4:
        return mp.mpf(-1)
    if x >= mp.mpf(1) / 4:
        return mp.mpf(1)
    return 4 * x / 3 + mp.mpf(2) / 3


# phase integral of the initial data: caps contribute 2 pi r^2 each side
cyl = mp.quad(lambda x: u0(x) * 2 * pi * mp.mpf(1) / 2, [-1.5, -1.25, 0.25, 1.5])
caps = -2 * pi * mp.mpf(1) / 4 + 2 * pi * mp.mpf(1) / 4
report("capped_cylinder_phase_integral", cyl + caps)

# Modica-Mortola energy of a tanh profile on a cylinder of radius y0 = 1
eps = mp.mpf("1e-3")
L = mp.mpf("0.05")
mm = mp.quad(lambda t: (eps * (1 - mp.tanh(t / eps) ** 2) ** 2 / eps**2 + W(mp.tanh(t / eps)) / eps) * 2 * pi,
             [-L, 0, L])
report("tanh_cylinder_mm_eps1e-3", mm)
report("tanh_cylinder_limit", 2 * pi * sigma)

# optimal profile energy over [-10, 10]
G = mp.quad(lambda t: (1 - mp.tanh(t) ** 2) ** 2 + W(mp.tanh(t)), [-10, 0, 10])
report("profile_energy_T10", G)

# limit energies
F_sphere_interface = (2 - 2) ** 2 * 2 * pi + (2 - 1) ** 2 * 2 * pi - 4 * pi + 2 * pi * sigma * 1
report("F_limit_sphere_equator", F_sphere_interface)

s05 = mp.sin(mp.mpf(1) / 2)
R = 1 / mp.sqrt(1 + s05)
cap = 2 * pi * R * R * (1 + s05)
y_j = R * mp.cos(mp.mpf(1) / 2)
F_kink = ((2 / R - 1) ** 2 - 1 / R**2) * cap + ((2 / R - 2) ** 2 - 1 / R**2) * cap \
    + 2 * pi * (sigma + 2 * 1) * y_j
report("kink_sphere_radius", R)
report("kink_sphere_junction_height", y_j)
report("F_limit_kink_sphere", F_kink)

# two lines meeting at a right angle at height 1 (equality case)
report("two_lines_limit", 2 * pi * 2 * (pi / 2) * 1)
report("axis_limit_per_length", 2 * pi * 2)

# interface examples of the limit energy
report("limit_interface_y05", 2 * pi * sigma * mp.mpf(0.5))
report("limit_kink_y05_delta1", 2 * pi * (sigma + 2) * mp.mpf(0.5))
report("limit_axis_03", 2 * pi * 2 * mp.mpf("0.3"))

# axis recovery constants
sh = mp.mpf(2)
alpha = 2 * pi / (sh * (pi - 2))
report("axis_alpha", alpha)
report("axis_ramp_height_check", 2 / sh + 2 * alpha / pi - alpha)

# rectangular signal length over one window
for k in (1, 2, 3):
    report(f"rect_signal_length_k{k}", 2 + mp.mpf(1) / k)
