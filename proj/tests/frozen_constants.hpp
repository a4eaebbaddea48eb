#pragma once

// Reference values for the dipole profile, computed independently with
// 50-digit arithmetic (mpmath): the normalization integral I(m) by
// high-precision quadrature, C from its defining expression, xi1 and the
// argmax in closed form, and the moment by direct quadrature of xi F_1.

namespace frozen {

struct ProfileConstants {
    double m;
    double kappa;
    double C;
    double xi1;
    double xi_bar;
};

inline constexpr ProfileConstants kProfiles[] = {
    {1.5, 1.0 / 15.0, 0.60505774607360482, 3.7560628490913920, 1.2818644409950562},
    {2.0, 1.0 / 12.0, 0.43100022717718363, 2.9906975624424411, 1.1868591141849652},
    {3.0, 1.0 / 12.0, 0.27314789243167443, 2.4360394940247838, 1.0686694242039855},
    {5.0, 1.0 / 15.0, 0.15743214753974764, 2.0463844748379449, 0.95360947694014122},
};

// m = 2 spot values
inline constexpr double kI2 = 0.15;  // I(2) = 2/5 - 1/4 exactly
inline constexpr double kF1Max_m2 = 0.35215863923098008;       // F_1(xi_bar)
inline constexpr double kF1Half_m2 = 0.28392984999659572;      // F_1(0.5)
inline constexpr double kF1One_m2 = 0.34766689384385029;       // F_1(1.0)
inline constexpr double kXiM_M4_m2 = 4.2294850537622565;       // xi1 * 4^{1/4}
inline constexpr double kDeltaBar_m2M1 = 0.53408660138323435;  // 0.45 xi_bar
inline constexpr double kTBar_m2M1 = 12.290039200315788;       // delta_bar^{-4}
inline constexpr double kBarenblattMass_m2 = 1.0 / 9.0;        // C = kappa_2

}  // namespace frozen
