#include "predicates.hpp"

#include <array>
#include <cmath>
#include <limits>

#include <boost/multiprecision/cpp_int.hpp>

namespace pslab::detail {
namespace {

using boost::multiprecision::cpp_int;

constexpr double kEps = std::numeric_limits<double>::epsilon() / 2.0;  // 2^-53
constexpr double kOrientBound = (3.0 + 16.0 * kEps) * kEps;
constexpr double kIncircleBound = (10.0 + 96.0 * kEps) * kEps;

// Converts doubles to integers sharing one power-of-two scale, so that
// differences and products are carried out without rounding.
template <std::size_t N>
std::array<cpp_int, N> to_common_scale(const std::array<double, N>& v) {
    std::array<long long, N> mant{};
    std::array<int, N> expo{};
    int min_exp = std::numeric_limits<int>::max();
    for (std::size_t i = 0; i < N; ++i) {
        if (v[i] == 0.0) {
            mant[i] = 0;
            expo[i] = 0;
            continue;
        }
        int e = 0;
        const double f = std::frexp(v[i], &e);
        mant[i] = static_cast<long long>(std::ldexp(f, 53));
        expo[i] = e - 53;
        if (expo[i] < min_exp) min_exp = expo[i];
    }
    std::array<cpp_int, N> out;
    for (std::size_t i = 0; i < N; ++i) {
        out[i] = mant[i];
        if (mant[i] != 0) out[i] <<= static_cast<unsigned>(expo[i] - min_exp);
    }
    return out;
}

int sign_of(const cpp_int& v) { return v.sign(); }

int orient_exact(Point a, Point b, Point c) {
    const auto s = to_common_scale<6>({a.x, a.y, b.x, b.y, c.x, c.y});
    const cpp_int det = (s[2] - s[0]) * (s[5] - s[1]) - (s[3] - s[1]) * (s[4] - s[0]);
    return sign_of(det);
}

int incircle_exact(Point a, Point b, Point c, Point d) {
    const auto s = to_common_scale<8>({a.x, a.y, b.x, b.y, c.x, c.y, d.x, d.y});
    const cpp_int adx = s[0] - s[6], ady = s[1] - s[7];
    const cpp_int bdx = s[2] - s[6], bdy = s[3] - s[7];
    const cpp_int cdx = s[4] - s[6], cdy = s[5] - s[7];
    const cpp_int alift = adx * adx + ady * ady;
    const cpp_int blift = bdx * bdx + bdy * bdy;
    const cpp_int clift = cdx * cdx + cdy * cdy;
    const cpp_int det = alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy) +
                        clift * (adx * bdy - bdx * ady);
    return sign_of(det);
}

}  // namespace

int orient2d(Point a, Point b, Point c) {
    const double detleft = (a.x - c.x) * (b.y - c.y);
    const double detright = (a.y - c.y) * (b.x - c.x);
    const double det = detleft - detright;
    const double bound = kOrientBound * (std::abs(detleft) + std::abs(detright));
    if (det > bound) return 1;
    if (-det > bound) return -1;
    return orient_exact(a, b, c);
}

int incircle(Point a, Point b, Point c, Point d) {
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;

    const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
    const double cdxady = cdx * ady, adxcdy = adx * cdy;
    const double adxbdy = adx * bdy, bdxady = bdx * ady;
    const double alift = adx * adx + ady * ady;
    const double blift = bdx * bdx + bdy * bdy;
    const double clift = cdx * cdx + cdy * cdy;

    const double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) +
                       clift * (adxbdy - bdxady);
    const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * alift +
                             (std::abs(cdxady) + std::abs(adxcdy)) * blift +
                             (std::abs(adxbdy) + std::abs(bdxady)) * clift;
    const double bound = kIncircleBound * permanent;
    if (det > bound) return 1;
    if (-det > bound) return -1;
    return incircle_exact(a, b, c, d);
}

}  // namespace pslab::detail
