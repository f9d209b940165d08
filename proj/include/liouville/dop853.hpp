#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

#include "errors.hpp"

namespace liouville {

// Seventh-order dense output over one accepted step [t0, t0 + h].
struct DenseStep {
  double t0 = 0, h = 0;
  int n = 0;
  std::vector<double> rc;  // 8 blocks of n

  double t1() const { return t0 + h; }

  void eval(double t, double* out) const {
    double s = (t - t0) / h, s1 = 1.0 - s;
    const double *r1 = rc.data(), *r2 = r1 + n, *r3 = r2 + n, *r4 = r3 + n, *r5 = r4 + n,
                 *r6 = r5 + n, *r7 = r6 + n, *r8 = r7 + n;
    for (int i = 0; i < n; ++i)
      out[i] = r1[i] + s * (r2[i] + s1 * (r3[i] + s * (r4[i] + s1 * (r5[i] + s * (r6[i] +
                                                       s1 * (r7[i] + s * r8[i]))))));
  }
  std::vector<double> eval(double t) const {
    std::vector<double> y(n);
    eval(t, y.data());
    return y;
  }
  double eval(double t, int i) const {
    double s = (t - t0) / h, s1 = 1.0 - s;
    auto r = [&](int k) { return rc[k * n + i]; };
    return r(0) + s * (r(1) + s1 * (r(2) + s * (r(3) + s1 * (r(4) + s * (r(5) + s1 * (r(6) +
                                                s * r(7)))))));
  }
};

struct Dop853Options {
  double rtol = 1e-10;
  double atol = 1e-12;
  double hmax = 0;           // 0: |T|
  double hmin_rel = 1e-14;   // underflow floor relative to max(1, |t|)
  long max_steps = 2000000;
};

struct Dop853Stats {
  long steps = 0, accepted = 0, rejected = 0, vetoed = 0, evals = 0;
};

// Dormand-Prince 8(5,3) with dense output (Hairer & Wanner's DOP853).
//
//   rhs(t, y, dy)                 right-hand side
//   veto(y_old, y_new) -> bool    extra rejection test on a step (true = reject)
//   on_step(step, y_new) -> bool  called after every accepted step; false stops
class Dop853 {
 public:
  using Rhs = std::function<void(double, const double*, double*)>;
  using Veto = std::function<bool(const std::vector<double>&, const std::vector<double>&)>;
  using OnStep = std::function<bool(const DenseStep&, const std::vector<double>&)>;

  Dop853(int n, Rhs rhs, Dop853Options opt = {}) : n_(n), f_(std::move(rhs)), opt_(opt) {
    for (auto* v : {&k1, &k2, &k3, &k4, &k5, &k6, &k7, &k8, &k9, &k10, &y1}) v->assign(n, 0.0);
  }

  const Dop853Stats& stats() const { return st_; }

  // Integrates from t0 to T; returns the time reached.
  double integrate(double t0, std::vector<double>& y, double T, const Veto& veto,
                   const OnStep& on_step) {
    const double posneg = T >= t0 ? 1.0 : -1.0;
    const double hmax = opt_.hmax > 0 ? opt_.hmax : std::abs(T - t0);
    if (T == t0) return t0;
    t_ = t0;
    y_ = y;
    f(t_, y_, k1);
    double h = hinit(hmax, posneg);
    bool last = false, reject = false;
    const double expo1 = 1.0 / 8.0, facc1 = 3.0, facc2 = 1.0 / 6.0, safe = 0.9;
    while (true) {
      if (st_.steps > opt_.max_steps) throw NumericalError("integrator: too many steps");
      double floor = opt_.hmin_rel * std::max(1.0, std::abs(t_));
      if (std::abs(h) < floor) {
        std::ostringstream os;
        os << "integrator: step size underflow at t = " << t_;
        throw NumericalError(os.str());
      }
      if ((t_ + 1.01 * h - T) * posneg > 0.0) {
        h = T - t_;
        last = true;
      }
      ++st_.steps;
      step12(h);
      double err = std::abs(h) * error_estimation();
      double fac11 = std::pow(err, expo1);
      double fac = std::max(facc2, std::min(facc1, fac11 / safe));
      double hnew = h / fac;
      if (err <= 1.0 && veto && veto(y_, k5)) {
        ++st_.vetoed;
        h *= 0.5;
        last = false;
        reject = true;
        continue;
      }
      if (err <= 1.0) {
        ++st_.accepted;
        f(t_ + h, k5, k4);
        DenseStep ds = dense_output(h);
        k1 = k4;
        y_ = k5;
        t_ += h;
        if (last) t_ = T;
        bool go = !on_step || on_step(ds, y_);
        if (last || !go) {
          y = y_;
          return t_;
        }
        if (std::abs(hnew) > hmax) hnew = posneg * hmax;
        if (reject) hnew = posneg * std::min(std::abs(hnew), std::abs(h));
        reject = false;
      } else {
        hnew = h / std::min(facc1, fac11 / safe);
        reject = true;
        if (st_.accepted >= 1) ++st_.rejected;
        last = false;
      }
      h = hnew;
    }
  }

 private:
  void f(double t, const std::vector<double>& y, std::vector<double>& dy) {
    ++st_.evals;
    f_(t, y.data(), dy.data());
  }

  double hinit(double hmax, double posneg) {
    double dnf = 0, dny = 0;
    for (int i = 0; i < n_; ++i) {
      double sk = opt_.atol + opt_.rtol * std::abs(y_[i]);
      dnf += (k1[i] / sk) * (k1[i] / sk);
      dny += (y_[i] / sk) * (y_[i] / sk);
    }
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
    h = std::min(h, hmax) * posneg;
    for (int i = 0; i < n_; ++i) y1[i] = y_[i] + h * k1[i];
    f(t_ + h, y1, k2);
    double der2 = 0;
    for (int i = 0; i < n_; ++i) {
      double s = (k2[i] - k1[i]) / (opt_.atol + opt_.rtol * std::abs(y_[i]));
      der2 += s * s;
    }
    der2 = std::sqrt(der2) / std::abs(h);
    double der12 = std::max(der2, std::sqrt(dnf));
    double h1 = der12 <= 1e-15 ? std::max(1e-6, std::abs(h) * 1e-3) : std::pow(0.01 / der12, 0.125);
    return std::min(100.0 * std::abs(h), std::min(h1, hmax)) * posneg;
  }

  void step12(double h) {
    static constexpr double c2 = 0.526001519587677318785587544488E-01,
                            c3 = 0.789002279381515978178381316732E-01,
                            c4 = 0.118350341907227396726757197510E+00,
                            c5 = 0.281649658092772603273242802490E+00,
                            c6 = 0.333333333333333333333333333333E+00, c7 = 0.25E+00,
                            c8 = 0.307692307692307692307692307692E+00,
                            c9 = 0.651282051282051282051282051282E+00, c10 = 0.6E+00,
                            c11 = 0.857142857142857142857142857142E+00;
    static constexpr double b1 = 5.42937341165687622380535766363E-2,
                            b6 = 4.45031289275240888144113950566E0,
                            b7 = 1.89151789931450038304281599044E0,
                            b8 = -5.8012039600105847814672114227E0,
                            b9 = 3.1116436695781989440891606237E-1,
                            b10 = -1.52160949662516078556178806805E-1,
                            b11 = 2.01365400804030348374776537501E-1,
                            b12 = 4.47106157277725905176885569043E-2;
    static constexpr double a21 = 5.26001519587677318785587544488E-2,
                            a31 = 1.97250569845378994544595329183E-2,
                            a32 = 5.91751709536136983633785987549E-2,
                            a41 = 2.95875854768068491816892993775E-2,
                            a43 = 8.87627564304205475450678981324E-2,
                            a51 = 2.41365134159266685502369798665E-1,
                            a53 = -8.84549479328286085344864962717E-1,
                            a54 = 9.24834003261792003115737966543E-1,
                            a61 = 3.7037037037037037037037037037E-2,
                            a64 = 1.70828608729473871279604482173E-1,
                            a65 = 1.25467687566822425016691814123E-1, a71 = 3.7109375E-2,
                            a74 = 1.70252211019544039314978060272E-1,
                            a75 = 6.02165389804559606850219397283E-2, a76 = -1.7578125E-2,
                            a81 = 3.70920001185047927108779319836E-2,
                            a84 = 1.70383925712239993810214054705E-1,
                            a85 = 1.07262030446373284651809199168E-1,
                            a86 = -1.53194377486244017527936158236E-2,
                            a87 = 8.27378916381402288758473766002E-3,
                            a91 = 6.24110958716075717114429577812E-1,
                            a94 = -3.36089262944694129406857109825E0,
                            a95 = -8.68219346841726006818189891453E-1,
                            a96 = 2.75920996994467083049415600797E1,
                            a97 = 2.01540675504778934086186788979E1,
                            a98 = -4.34898841810699588477366255144E1,
                            a101 = 4.77662536438264365890433908527E-1,
                            a104 = -2.48811461997166764192642586468E0,
                            a105 = -5.90290826836842996371446475743E-1,
                            a106 = 2.12300514481811942347288949897E1,
                            a107 = 1.52792336328824235832596922938E1,
                            a108 = -3.32882109689848629194453265587E1,
                            a109 = -2.03312017085086261358222928593E-2,
                            a111 = -9.3714243008598732571704021658E-1,
                            a114 = 5.18637242884406370830023853209E0,
                            a115 = 1.09143734899672957818500254654E0,
                            a116 = -8.14978701074692612513997267357E0,
                            a117 = -1.85200656599969598641566180701E1,
                            a118 = 2.27394870993505042818970056734E1,
                            a119 = 2.49360555267965238987089396762E0,
                            a1110 = -3.0467644718982195003823669022E0,
                            a121 = 2.27331014751653820792359768449E0,
                            a124 = -1.05344954667372501984066689879E1,
                            a125 = -2.00087205822486249909675718444E0,
                            a126 = -1.79589318631187989172765950534E1,
                            a127 = 2.79488845294199600508499808837E1,
                            a128 = -2.85899827713502369474065508674E0,
                            a129 = -8.87285693353062954433549289258E0,
                            a1210 = 1.23605671757943030647266201528E1,
                            a1211 = 6.43392746015763530355970484046E-1;
    const std::vector<double>& w = y_;
    const double t = t_;
    for (int i = 0; i < n_; ++i) y1[i] = w[i] + h * a21 * k1[i];
    f(t + c2 * h, y1, k2);
    for (int i = 0; i < n_; ++i) y1[i] = w[i] + h * (a31 * k1[i] + a32 * k2[i]);
    f(t + c3 * h, y1, k3);
    for (int i = 0; i < n_; ++i) y1[i] = w[i] + h * (a41 * k1[i] + a43 * k3[i]);
    f(t + c4 * h, y1, k4);
    for (int i = 0; i < n_; ++i) y1[i] = w[i] + h * (a51 * k1[i] + a53 * k3[i] + a54 * k4[i]);
    f(t + c5 * h, y1, k5);
    for (int i = 0; i < n_; ++i) y1[i] = w[i] + h * (a61 * k1[i] + a64 * k4[i] + a65 * k5[i]);
    f(t + c6 * h, y1, k6);
    for (int i = 0; i < n_; ++i)
      y1[i] = w[i] + h * (a71 * k1[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    f(t + c7 * h, y1, k7);
    for (int i = 0; i < n_; ++i)
      y1[i] = w[i] + h * (a81 * k1[i] + a84 * k4[i] + a85 * k5[i] + a86 * k6[i] + a87 * k7[i]);
    f(t + c8 * h, y1, k8);
    for (int i = 0; i < n_; ++i)
      y1[i] = w[i] + h * (a91 * k1[i] + a94 * k4[i] + a95 * k5[i] + a96 * k6[i] + a97 * k7[i] +
                          a98 * k8[i]);
    f(t + c9 * h, y1, k9);
    for (int i = 0; i < n_; ++i)
      y1[i] = w[i] + h * (a101 * k1[i] + a104 * k4[i] + a105 * k5[i] + a106 * k6[i] +
                          a107 * k7[i] + a108 * k8[i] + a109 * k9[i]);
    f(t + c10 * h, y1, k10);
    for (int i = 0; i < n_; ++i)
      y1[i] = w[i] + h * (a111 * k1[i] + a114 * k4[i] + a115 * k5[i] + a116 * k6[i] +
                          a117 * k7[i] + a118 * k8[i] + a119 * k9[i] + a1110 * k10[i]);
    f(t + c11 * h, y1, k2);
    for (int i = 0; i < n_; ++i)
      y1[i] = w[i] + h * (a121 * k1[i] + a124 * k4[i] + a125 * k5[i] + a126 * k6[i] +
                          a127 * k7[i] + a128 * k8[i] + a129 * k9[i] + a1210 * k10[i] +
                          a1211 * k2[i]);
    f(t + h, y1, k3);
    for (int i = 0; i < n_; ++i) {
      k4[i] = b1 * k1[i] + b6 * k6[i] + b7 * k7[i] + b8 * k8[i] + b9 * k9[i] + b10 * k10[i] +
              b11 * k2[i] + b12 * k3[i];
      k5[i] = w[i] + h * k4[i];
    }
  }

  double error_estimation() {
    static constexpr double bhh1 = 0.244094488188976377952755905512E+00,
                            bhh2 = 0.733846688281611857341361741547E+00,
                            bhh3 = 0.220588235294117647058823529412E-01,
                            er1 = 0.1312004499419488073250102996E-01,
                            er6 = -0.1225156446376204440720569753E+01,
                            er7 = -0.4957589496572501915214079952E+00,
                            er8 = 0.1664377182454986536961530415E+01,
                            er9 = -0.3503288487499736816886487290E+00,
                            er10 = 0.3341791187130174790297318841E+00,
                            er11 = 0.8192320648511571246570742613E-01,
                            er12 = -0.2235530786388629525884427845E-01;
    double err = 0, err2 = 0;
    for (int i = 0; i < n_; ++i) {
      double sk = 1.0 / (opt_.atol + opt_.rtol * std::max(std::abs(y_[i]), std::abs(k5[i])));
      double s = (k4[i] - bhh1 * k1[i] - bhh2 * k9[i] - bhh3 * k3[i]) * sk;
      err2 += s * s;
      s = (er1 * k1[i] + er6 * k6[i] + er7 * k7[i] + er8 * k8[i] + er9 * k9[i] + er10 * k10[i] +
           er11 * k2[i] + er12 * k3[i]) * sk;
      err += s * s;
    }
    double deno = err + 0.01 * err2;
    return err * std::sqrt(1.0 / (deno <= 0.0 ? n_ : deno * n_));
  }

  // Needs k1..k10 of the step and k4 = f(t + h, y_new) on entry.
  DenseStep dense_output(double h) {
    static constexpr double c14 = 0.1E+00, c15 = 0.2E+00,
                            c16 = 0.777777777777777777777777777778E+00;
    static constexpr double a141 = 5.61675022830479523392909219681E-2,
                            a147 = 2.53500210216624811088794765333E-1,
                            a148 = -2.46239037470802489917441475441E-1,
                            a149 = -1.24191423263816360469010140626E-1,
                            a1410 = 1.5329179827876569731206322685E-1,
                            a1411 = 8.20105229563468988491666602057E-3,
                            a1412 = 7.56789766054569976138603589584E-3, a1413 = -8.298E-3,
                            a151 = 3.18346481635021405060768473261E-2,
                            a156 = 2.83009096723667755288322961402E-2,
                            a157 = 5.35419883074385676223797384372E-2,
                            a158 = -5.49237485713909884646569340306E-2,
                            a1511 = -1.08347328697249322858509316994E-4,
                            a1512 = 3.82571090835658412954920192323E-4,
                            a1513 = -3.40465008687404560802977114492E-4,
                            a1514 = 1.41312443674632500278074618366E-1,
                            a161 = -4.28896301583791923408573538692E-1,
                            a166 = -4.69762141536116384314449447206E0,
                            a167 = 7.68342119606259904184240953878E0,
                            a168 = 4.06898981839711007970213554331E0,
                            a169 = 3.56727187455281109270669543021E-1,
                            a1613 = -1.39902416515901462129418009734E-3,
                            a1614 = 2.9475147891527723389556272149E0,
                            a1615 = -9.15095847217987001081870187138E0;
    static constexpr double d41 = -0.84289382761090128651353491142E+01,
                            d46 = 0.56671495351937776962531783590E+00,
                            d47 = -0.30689499459498916912797304727E+01,
                            d48 = 0.23846676565120698287728149680E+01,
                            d49 = 0.21170345824450282767155149946E+01,
                            d410 = -0.87139158377797299206789907490E+00,
                            d411 = 0.22404374302607882758541771650E+01,
                            d412 = 0.63157877876946881815570249290E+00,
                            d413 = -0.88990336451333310820698117400E-01,
                            d414 = 0.18148505520854727256656404962E+02,
                            d415 = -0.91946323924783554000451984436E+01,
                            d416 = -0.44360363875948939664310572000E+01,
                            d51 = 0.10427508642579134603413151009E+02,
                            d56 = 0.24228349177525818288430175319E+03,
                            d57 = 0.16520045171727028198505394887E+03,
                            d58 = -0.37454675472269020279518312152E+03,
                            d59 = -0.22113666853125306036270938578E+02,
                            d510 = 0.77334326684722638389603898808E+01,
                            d511 = -0.30674084731089398182061213626E+02,
                            d512 = -0.93321305264302278729567221706E+01,
                            d513 = 0.15697238121770843886131091075E+02,
                            d514 = -0.31139403219565177677282850411E+02,
                            d515 = -0.93529243588444783865713862664E+01,
                            d516 = 0.35816841486394083752465898540E+02,
                            d61 = 0.19985053242002433820987653617E+02,
                            d66 = -0.38703730874935176555105901742E+03,
                            d67 = -0.18917813819516756882830838328E+03,
                            d68 = 0.52780815920542364900561016686E+03,
                            d69 = -0.11573902539959630126141871134E+02,
                            d610 = 0.68812326946963000169666922661E+01,
                            d611 = -0.10006050966910838403183860980E+01,
                            d612 = 0.77771377980534432092869265740E+00,
                            d613 = -0.27782057523535084065932004339E+01,
                            d614 = -0.60196695231264120758267380846E+02,
                            d615 = 0.84320405506677161018159903784E+02,
                            d616 = 0.11992291136182789328035130030E+02,
                            d71 = -0.25693933462703749003312586129E+02,
                            d76 = -0.15418974869023643374053993627E+03,
                            d77 = -0.23152937917604549567536039109E+03,
                            d78 = 0.35763911791061412378285349910E+03,
                            d79 = 0.93405324183624310003907691704E+02,
                            d710 = -0.37458323136451633156875139351E+02,
                            d711 = 0.10409964950896230045147246184E+03,
                            d712 = 0.29840293426660503123344363579E+02,
                            d713 = -0.43533456590011143754432175058E+02,
                            d714 = 0.96324553959188282948394950600E+02,
                            d715 = -0.39177261675615439165231486172E+02,
                            d716 = -0.14972683625798562581422125276E+03;
    const int n = n_;
    DenseStep ds;
    ds.t0 = t_;
    ds.h = h;
    ds.n = n;
    ds.rc.assign(8 * n, 0.0);
    double *rc1 = ds.rc.data(), *rc2 = rc1 + n, *rc3 = rc2 + n, *rc4 = rc3 + n, *rc5 = rc4 + n,
           *rc6 = rc5 + n, *rc7 = rc6 + n, *rc8 = rc7 + n;
    const std::vector<double>& w = y_;
    for (int i = 0; i < n; ++i) {
      rc1[i] = w[i];
      double ydiff = k5[i] - w[i];
      rc2[i] = ydiff;
      double bspl = h * k1[i] - ydiff;
      rc3[i] = bspl;
      rc4[i] = ydiff - h * k4[i] - bspl;
      rc5[i] = d41 * k1[i] + d46 * k6[i] + d47 * k7[i] + d48 * k8[i] + d49 * k9[i] +
               d410 * k10[i] + d411 * k2[i] + d412 * k3[i];
      rc6[i] = d51 * k1[i] + d56 * k6[i] + d57 * k7[i] + d58 * k8[i] + d59 * k9[i] +
               d510 * k10[i] + d511 * k2[i] + d512 * k3[i];
      rc7[i] = d61 * k1[i] + d66 * k6[i] + d67 * k7[i] + d68 * k8[i] + d69 * k9[i] +
               d610 * k10[i] + d611 * k2[i] + d612 * k3[i];
      rc8[i] = d71 * k1[i] + d76 * k6[i] + d77 * k7[i] + d78 * k8[i] + d79 * k9[i] +
               d710 * k10[i] + d711 * k2[i] + d712 * k3[i];
    }
    // three extra stages; k10, k2, k3 are free after this point
    std::vector<double> s14(n), s15(n), s16(n);
    for (int i = 0; i < n; ++i)
      y1[i] = w[i] + h * (a141 * k1[i] + a147 * k7[i] + a148 * k8[i] + a149 * k9[i] +
                          a1410 * k10[i] + a1411 * k2[i] + a1412 * k3[i] + a1413 * k4[i]);
    f(t_ + c14 * h, y1, s14);
    for (int i = 0; i < n; ++i)
      y1[i] = w[i] + h * (a151 * k1[i] + a156 * k6[i] + a157 * k7[i] + a158 * k8[i] +
                          a1511 * k2[i] + a1512 * k3[i] + a1513 * k4[i] + a1514 * s14[i]);
    f(t_ + c15 * h, y1, s15);
    for (int i = 0; i < n; ++i)
      y1[i] = w[i] + h * (a161 * k1[i] + a166 * k6[i] + a167 * k7[i] + a168 * k8[i] +
                          a169 * k9[i] + a1613 * k4[i] + a1614 * s14[i] + a1615 * s15[i]);
    f(t_ + c16 * h, y1, s16);
    for (int i = 0; i < n; ++i) {
      rc5[i] = h * (rc5[i] + d413 * k4[i] + d414 * s14[i] + d415 * s15[i] + d416 * s16[i]);
      rc6[i] = h * (rc6[i] + d513 * k4[i] + d514 * s14[i] + d515 * s15[i] + d516 * s16[i]);
      rc7[i] = h * (rc7[i] + d613 * k4[i] + d614 * s14[i] + d615 * s15[i] + d616 * s16[i]);
      rc8[i] = h * (rc8[i] + d713 * k4[i] + d714 * s14[i] + d715 * s15[i] + d716 * s16[i]);
    }
    return ds;
  }

  int n_;
  Rhs f_;
  Dop853Options opt_;
  Dop853Stats st_;
  double t_ = 0;
  std::vector<double> y_, k1, k2, k3, k4, k5, k6, k7, k8, k9, k10, y1;
};

}  // namespace liouville
