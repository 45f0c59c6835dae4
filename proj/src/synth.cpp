#include "ttclass/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "ttclass/rng.hpp"

namespace ttclass {

namespace {

constexpr Eigen::Index kGlyphW = 5;
constexpr Eigen::Index kGlyphH = 7;
constexpr Eigen::Index kUpscale = 4;
constexpr Eigen::Index kFieldW = kGlyphW * kUpscale;  // 20
constexpr Eigen::Index kFieldH = kGlyphH * kUpscale;  // 28
constexpr Eigen::Index kCanvas = 28;

// 5x7 bitmap font, row-major, one string per digit
constexpr std::array<const char*, 10> kFont = {
    "01110"
    "10001"
    "10011"
    "10101"
    "11001"
    "10001"
    "01110",
    "00100"
    "01100"
    "00100"
    "00100"
    "00100"
    "00100"
    "01110",
    "01110"
    "10001"
    "00001"
    "00010"
    "00100"
    "01000"
    "11111",
    "11111"
    "00010"
    "00100"
    "00010"
    "00001"
    "10001"
    "01110",
    "00010"
    "00110"
    "01010"
    "10010"
    "11111"
    "00010"
    "00010",
    "11111"
    "10000"
    "11110"
    "00001"
    "00001"
    "10001"
    "01110",
    "00110"
    "01000"
    "10000"
    "11110"
    "10001"
    "10001"
    "01110",
    "11111"
    "00001"
    "00010"
    "00100"
    "01000"
    "01000"
    "01000",
    "01110"
    "10001"
    "10001"
    "01110"
    "10001"
    "10001"
    "01110",
    "01110"
    "10001"
    "10001"
    "01111"
    "00001"
    "00010"
    "01100"};

using Field = std::vector<double>;  // kFieldH x kFieldW row-major

Field render_field(int digit, int dilate) {
    Field field(static_cast<std::size_t>(kFieldH * kFieldW), 0.0);
    const char* bitmap = kFont[static_cast<std::size_t>(digit)];
    for (Eigen::Index r = 0; r < kFieldH; ++r)
        for (Eigen::Index c = 0; c < kFieldW; ++c)
            if (bitmap[(r / kUpscale) * kGlyphW + (c / kUpscale)] == '1')
                field[static_cast<std::size_t>(r * kFieldW + c)] = 1.0;

    for (int pass = 0; pass < dilate; ++pass) {
        Field next = field;
        for (Eigen::Index r = 0; r < kFieldH; ++r)
            for (Eigen::Index c = 0; c < kFieldW; ++c) {
                double v = 0.0;
                for (Eigen::Index dr = -1; dr <= 1; ++dr)
                    for (Eigen::Index dc = -1; dc <= 1; ++dc) {
                        const Eigen::Index rr = r + dr, cc = c + dc;
                        if (rr >= 0 && rr < kFieldH && cc >= 0 && cc < kFieldW)
                            v = std::max(v, field[static_cast<std::size_t>(rr * kFieldW + cc)]);
                    }
                next[static_cast<std::size_t>(r * kFieldW + c)] = v;
            }
        field = std::move(next);
    }

    // two box-blur passes for soft edges
    for (int pass = 0; pass < 2; ++pass) {
        Field next(field.size(), 0.0);
        for (Eigen::Index r = 0; r < kFieldH; ++r)
            for (Eigen::Index c = 0; c < kFieldW; ++c) {
                double sum = 0.0;
                int n = 0;
                for (Eigen::Index dr = -1; dr <= 1; ++dr)
                    for (Eigen::Index dc = -1; dc <= 1; ++dc) {
                        const Eigen::Index rr = r + dr, cc = c + dc;
                        if (rr >= 0 && rr < kFieldH && cc >= 0 && cc < kFieldW) {
                            sum += field[static_cast<std::size_t>(rr * kFieldW + cc)];
                            ++n;
                        }
                    }
                next[static_cast<std::size_t>(r * kFieldW + c)] = sum / n;
            }
        field = std::move(next);
    }
    return field;
}

double sample_bilinear(const Field& field, double r, double c) {
    if (r < 0.0 || c < 0.0 || r > kFieldH - 1.0 || c > kFieldW - 1.0) return 0.0;
    const auto r0 = static_cast<Eigen::Index>(std::floor(r));
    const auto c0 = static_cast<Eigen::Index>(std::floor(c));
    const Eigen::Index r1 = std::min(r0 + 1, kFieldH - 1);
    const Eigen::Index c1 = std::min(c0 + 1, kFieldW - 1);
    const double fr = r - static_cast<double>(r0);
    const double fc = c - static_cast<double>(c0);
    const double v00 = field[static_cast<std::size_t>(r0 * kFieldW + c0)];
    const double v01 = field[static_cast<std::size_t>(r0 * kFieldW + c1)];
    const double v10 = field[static_cast<std::size_t>(r1 * kFieldW + c0)];
    const double v11 = field[static_cast<std::size_t>(r1 * kFieldW + c1)];
    return (1 - fr) * ((1 - fc) * v00 + fc * v01) + fr * ((1 - fc) * v10 + fc * v11);
}

}  // namespace

Dataset make_synthetic_digits(Eigen::Index count, std::uint64_t seed) {
    if (count < 1) throw ValidationError("make_synthetic_digits: count must be >= 1");
    Dataset ds;
    ds.height = kCanvas;
    ds.width = kCanvas;
    ds.class_names = digit_class_names();
    ds.X.resize(kCanvas * kCanvas, count);
    ds.Y = Matrix::Zero(10, count);

    Rng rng(seed);
    for (Eigen::Index j = 0; j < count; ++j) {
        const int digit = static_cast<int>(j % 10);
        ds.Y(digit, j) = 1.0;

        const int dilate = rng.uniform() < 0.4 ? 1 : 0;
        const Field field = render_field(digit, dilate);

        const double angle = rng.uniform(-0.38, 0.38);
        const double scale_x = rng.uniform(0.62, 1.15);
        const double scale_y = rng.uniform(0.62, 1.15);
        const double shear = rng.uniform(-0.32, 0.32);
        const double shift_r = rng.uniform(-3.4, 3.4);
        const double shift_c = rng.uniform(-3.4, 3.4);
        const double brightness = rng.uniform(0.55, 1.0);

        // canvas -> field transform: A = S * Shear * Rot, applied around centers
        const double ca = std::cos(angle), sa = std::sin(angle);
        // forward map (field -> canvas); invert the 2x2 part for sampling
        const double a00 = scale_y * ca, a01 = scale_y * (-sa + shear * ca);
        const double a10 = scale_x * sa, a11 = scale_x * (ca + shear * sa);
        const double det = a00 * a11 - a01 * a10;
        const double i00 = a11 / det, i01 = -a01 / det;
        const double i10 = -a10 / det, i11 = a00 / det;

        const double field_cr = (kFieldH - 1) / 2.0;
        const double field_cc = (kFieldW - 1) / 2.0;
        const double canvas_cr = (kCanvas - 1) / 2.0 + shift_r;
        const double canvas_cc = (kCanvas - 1) / 2.0 + shift_c;

        for (Eigen::Index r = 0; r < kCanvas; ++r)
            for (Eigen::Index c = 0; c < kCanvas; ++c) {
                const double dr = static_cast<double>(r) - canvas_cr;
                const double dc = static_cast<double>(c) - canvas_cc;
                const double fr = field_cr + i00 * dr + i01 * dc;
                const double fc = field_cc + i10 * dr + i11 * dc;
                double v = brightness * sample_bilinear(field, fr, fc);
                v += rng.uniform(-0.07, 0.07);
                ds.X(r * kCanvas + c, j) = std::clamp(v, 0.0, 1.0);
            }

        // quantize like byte-valued source data so IDX round trips are exact
        for (Eigen::Index i = 0; i < kCanvas * kCanvas; ++i)
            ds.X(i, j) = std::round(ds.X(i, j) * 255.0) / 255.0;
    }
    return ds;
}

}  // namespace ttclass
