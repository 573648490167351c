#pragma once

#include "nahm/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace nahm::dop853 {

// Dormand-Prince 8(5,3) coefficients (Hairer, Norsett, Wanner).
inline constexpr double c2 = 0.526001519587677318785587544488E-01;
inline constexpr double c3 = 0.789002279381515978178381316732E-01;
inline constexpr double c4 = 0.118350341907227396726757197510;
inline constexpr double c5 = 0.281649658092772603273242802490;
inline constexpr double c6 = 0.333333333333333333333333333333;
inline constexpr double c7 = 0.25;
inline constexpr double c8 = 0.307692307692307692307692307692;
inline constexpr double c9 = 0.651282051282051282051282051282;
inline constexpr double c10 = 0.6;
inline constexpr double c11 = 0.857142857142857142857142857142;

inline constexpr double b1 = 5.42937341165687622380535766363E-2;
inline constexpr double b6 = 4.45031289275240888144113950566;
inline constexpr double b7 = 1.89151789931450038304281599044;
inline constexpr double b8 = -5.8012039600105847814672114227;
inline constexpr double b9 = 3.1116436695781989440891606237E-1;
inline constexpr double b10 = -1.52160949662516078556178806805E-1;
inline constexpr double b11 = 2.01365400804030348374776537501E-1;
inline constexpr double b12 = 4.47106157277725905176885569043E-2;

inline constexpr double bhh1 = 0.244094488188976377952755905512;
inline constexpr double bhh2 = 0.733846688281611857341361741547;
inline constexpr double bhh3 = 0.220588235294117647058823529412E-01;

inline constexpr double er1 = 0.1312004499419488073250102996E-01;
inline constexpr double er6 = -0.1225156446376204440720569753E+01;
inline constexpr double er7 = -0.4957589496572501915214079952;
inline constexpr double er8 = 0.1664377182454986536961530415E+01;
inline constexpr double er9 = -0.3503288487499736816886487290;
inline constexpr double er10 = 0.3341791187130174790297318841;
inline constexpr double er11 = 0.8192320648511571246570742613E-01;
inline constexpr double er12 = -0.2235530786388629525884427845E-01;

inline constexpr double a21 = 5.26001519587677318785587544488E-2;
inline constexpr double a31 = 1.97250569845378994544595329183E-2;
inline constexpr double a32 = 5.91751709536136983633785987549E-2;
inline constexpr double a41 = 2.95875854768068491816892993775E-2;
inline constexpr double a43 = 8.87627564304205475450678981324E-2;
inline constexpr double a51 = 2.41365134159266685502369798665E-1;
inline constexpr double a53 = -8.84549479328286085344864962717E-1;
inline constexpr double a54 = 9.24834003261792003115737966543E-1;
inline constexpr double a61 = 3.7037037037037037037037037037E-2;
inline constexpr double a64 = 1.70828608729473871279604482173E-1;
inline constexpr double a65 = 1.25467687566822425016691814123E-1;
inline constexpr double a71 = 3.7109375E-2;
inline constexpr double a74 = 1.70252211019544039314978060272E-1;
inline constexpr double a75 = 6.02165389804559606850219397283E-2;
inline constexpr double a76 = -1.7578125E-2;
inline constexpr double a81 = 3.70920001185047927108779319836E-2;
inline constexpr double a84 = 1.70383925712239993810214054705E-1;
inline constexpr double a85 = 1.07262030446373284651809199168E-1;
inline constexpr double a86 = -1.53194377486244017527936158236E-2;
inline constexpr double a87 = 8.27378916381402288758473766002E-3;
inline constexpr double a91 = 6.24110958716075717114429577812E-1;
inline constexpr double a94 = -3.36089262944694129406857109825;
inline constexpr double a95 = -8.68219346841726006818189891453E-1;
inline constexpr double a96 = 2.75920996994467083049415600797E1;
inline constexpr double a97 = 2.01540675504778934086186788979E1;
inline constexpr double a98 = -4.34898841810699588477366255144E1;
inline constexpr double a101 = 4.77662536438264365890433908527E-1;
inline constexpr double a104 = -2.48811461997166764192642586468;
inline constexpr double a105 = -5.90290826836842996371446475743E-1;
inline constexpr double a106 = 2.12300514481811942347288949897E1;
inline constexpr double a107 = 1.52792336328824235832596922938E1;
inline constexpr double a108 = -3.32882109689848629194453265587E1;
inline constexpr double a109 = -2.03312017085086261358222928593E-2;
inline constexpr double a111 = -9.3714243008598732571704021658E-1;
inline constexpr double a114 = 5.18637242884406370830023853209;
inline constexpr double a115 = 1.09143734899672957818500254654;
inline constexpr double a116 = -8.14978701074692612513997267357;
inline constexpr double a117 = -1.85200656599969598641566180701E1;
inline constexpr double a118 = 2.27394870993505042818970056734E1;
inline constexpr double a119 = 2.49360555267965238987089396762;
inline constexpr double a1110 = -3.0467644718982195003823669022;
inline constexpr double a121 = 2.27331014751653820792359768449;
inline constexpr double a124 = -1.05344954667372501984066689879E1;
inline constexpr double a125 = -2.00087205822486249909675718444;
inline constexpr double a126 = -1.79589318631187989172765950534E1;
inline constexpr double a127 = 2.79488845294199600508499808837E1;
inline constexpr double a128 = -2.85899827713502369474065508674;
inline constexpr double a129 = -8.87285693353062954433549289258;
inline constexpr double a1210 = 1.23605671757943030647266201528E1;
inline constexpr double a1211 = 6.43392746015763530355970484046E-1;

// One step y(t) -> y(t+h) of dy/dt = f(t, y). If err is non-null it receives
// the combined 5th/3rd order error estimate, scaled by sk = atol + rtol*max(|y|,|ynew|).
template <class M, class F>
M step(F&& f, double t, double h, const M& y, double* err = nullptr, double rtol = 0, double atol = 0) {
  M k1 = f(t, y);
  M k2 = f(t + c2 * h, (y + h * a21 * k1).eval());
  M k3 = f(t + c3 * h, (y + h * (a31 * k1 + a32 * k2)).eval());
  M k4 = f(t + c4 * h, (y + h * (a41 * k1 + a43 * k3)).eval());
  M k5 = f(t + c5 * h, (y + h * (a51 * k1 + a53 * k3 + a54 * k4)).eval());
  M k6 = f(t + c6 * h, (y + h * (a61 * k1 + a64 * k4 + a65 * k5)).eval());
  M k7 = f(t + c7 * h, (y + h * (a71 * k1 + a74 * k4 + a75 * k5 + a76 * k6)).eval());
  M k8 = f(t + c8 * h, (y + h * (a81 * k1 + a84 * k4 + a85 * k5 + a86 * k6 + a87 * k7)).eval());
  M k9 = f(t + c9 * h, (y + h * (a91 * k1 + a94 * k4 + a95 * k5 + a96 * k6 + a97 * k7 + a98 * k8)).eval());
  M k10 = f(t + c10 * h,
            (y + h * (a101 * k1 + a104 * k4 + a105 * k5 + a106 * k6 + a107 * k7 + a108 * k8 + a109 * k9)).eval());
  M k11 = f(t + c11 * h, (y + h * (a111 * k1 + a114 * k4 + a115 * k5 + a116 * k6 + a117 * k7 + a118 * k8 +
                                   a119 * k9 + a1110 * k10))
                             .eval());
  M k12 = f(t + h, (y + h * (a121 * k1 + a124 * k4 + a125 * k5 + a126 * k6 + a127 * k7 + a128 * k8 + a129 * k9 +
                             a1210 * k10 + a1211 * k11))
                       .eval());
  M inc = b1 * k1 + b6 * k6 + b7 * k7 + b8 * k8 + b9 * k9 + b10 * k10 + b11 * k11 + b12 * k12;
  M ynew = y + h * inc;
  if (err) {
    auto sk = (atol + rtol * y.cwiseAbs().cwiseMax(ynew.cwiseAbs()).array()).eval();
    auto e2 = ((inc - bhh1 * k1 - bhh2 * k9 - bhh3 * k12).cwiseAbs().array() / sk).eval();
    auto e1 = ((er1 * k1 + er6 * k6 + er7 * k7 + er8 * k8 + er9 * k9 + er10 * k10 + er11 * k11 + er12 * k12)
                   .cwiseAbs()
                   .array() /
               sk)
                  .eval();
    double s1 = e1.square().sum(), s2 = e2.square().sum();
    double den = s1 + 0.01 * s2;
    if (den <= 0) den = 1.0;
    *err = std::abs(h) * s1 * std::sqrt(1.0 / (den * static_cast<double>(y.size())));
  }
  return ynew;
}

struct AdaptiveStats {
  long accepted = 0;
  long rejected = 0;
  bool ok = true;
};

// Adaptive integration from t0 to t1 (either direction). `post` is applied to
// each accepted state (e.g. a projection); `guard` may return false to abort.
template <class M, class F, class Post, class Guard>
AdaptiveStats integrate(F&& f, double t0, double t1, M& y, double rtol, double atol, double& h, Post&& post,
                        Guard&& guard, long max_steps = 200000) {
  AdaptiveStats st;
  const double dir = t1 >= t0 ? 1.0 : -1.0;
  double t = t0;
  if (h <= 0) h = 1e-3 * std::abs(t1 - t0);
  while (dir * (t1 - t) > 1e-14 * std::max(1.0, std::abs(t1))) {
    if (st.accepted + st.rejected > max_steps) {
      st.ok = false;
      return st;
    }
    double hh = std::min(h, std::abs(t1 - t));
    double err = 0;
    M yn = step(f, t, dir * hh, y, &err, rtol, atol);
    if (!std::isfinite(err)) err = 1e10;
    double fac = std::pow(std::max(err, 1e-30), 0.125) / 0.9;
    fac = std::clamp(fac, 1.0 / 6.0, 3.0);
    if (err <= 1.0) {
      t += dir * hh;
      y = yn;
      post(y);
      ++st.accepted;
      if (!guard(t, y)) {
        st.ok = false;
        return st;
      }
      h = hh / fac;
    } else {
      ++st.rejected;
      h = hh / std::max(fac, 1.0);
    }
  }
  return st;
}

}  // namespace nahm::dop853
