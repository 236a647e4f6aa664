#include "cogest/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "cogest/errors.hpp"

namespace cogest::plot {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double x) {
    std::ostringstream ss;
    ss.precision(4);
    ss << x;
    return ss.str();
}

}  // namespace

std::vector<training::LossRecord> read_loss_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("plot: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != "step,loss_name,value")
        throw ValidationError("plot: " + path + " does not start with the loss CSV header");
    std::vector<training::LossRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const size_t c1 = line.find(',');
        const size_t c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw ValidationError("plot: malformed loss row '" + line + "'");
        training::LossRecord rec;
        try {
            rec.step = std::stoi(line.substr(0, c1));
            rec.name = line.substr(c1 + 1, c2 - c1 - 1);
            rec.value = std::stod(line.substr(c2 + 1));
        } catch (const std::exception&) {
            throw ValidationError("plot: malformed loss row '" + line + "'");
        }
        out.push_back(std::move(rec));
    }
    return out;
}

std::string loss_curves_svg(const std::vector<training::LossRecord>& history,
                            const std::string& title) {
    if (history.empty()) throw ValidationError("plot: empty loss history");

    // Group into curves, keeping first-appearance order for stable colors.
    std::vector<std::string> names;
    std::map<std::string, std::vector<std::pair<int, double>>> curves;
    int max_step = 0;
    for (const auto& rec : history) {
        if (!curves.count(rec.name)) names.push_back(rec.name);
        curves[rec.name].push_back({rec.step, rec.value});
        max_step = std::max(max_step, rec.step);
    }

    const auto ty = [](double v) { return std::log10(std::max(v, 0.0) + 1e-6); };
    double ylo = 1e300, yhi = -1e300;
    for (const auto& rec : history) {
        ylo = std::min(ylo, ty(rec.value));
        yhi = std::max(yhi, ty(rec.value));
    }
    if (yhi - ylo < 1e-9) {
        ylo -= 0.5;
        yhi += 0.5;
    }

    const double w = 760, h = 420, l = 64, r = 620, t = 40, b = 380;
    const auto px = [&](double step) {
        return l + (r - l) * (max_step > 0 ? step / max_step : 0.5);
    };
    const auto py = [&](double v) { return b - (b - t) * (ty(v) - ylo) / (yhi - ylo); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" viewBox=\"0 0 " << w << " " << h << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << l << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">" << title
        << "</text>\n";

    // Axes with back-mapped tick labels on the log-scaled value axis.
    svg << "<line x1=\"" << l << "\" y1=\"" << b << "\" x2=\"" << r << "\" y2=\"" << b
        << "\" stroke=\"#333\"/>\n<line x1=\"" << l << "\" y1=\"" << t << "\" x2=\"" << l
        << "\" y2=\"" << b << "\" stroke=\"#333\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double tv = ylo + (yhi - ylo) * k / 4.0;
        const double y = b - (b - t) * k / 4.0;
        svg << "<text x=\"" << l - 6 << "\" y=\"" << y + 4
            << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">"
            << fmt(std::pow(10.0, tv) - 1e-6) << "</text>\n"
            << "<line x1=\"" << l << "\" y1=\"" << y << "\" x2=\"" << r << "\" y2=\"" << y
            << "\" stroke=\"#ddd\"/>\n";
        const int step = max_step * k / 4;
        svg << "<text x=\"" << px(step) << "\" y=\"" << b + 16
            << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" << step
            << "</text>\n";
    }
    svg << "<text x=\"" << (l + r) / 2 << "\" y=\"" << h - 8
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">step</text>\n";

    for (size_t ci = 0; ci < names.size(); ++ci) {
        const char* color = kPalette[ci % 8];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [step, value] : curves[names[ci]])
            svg << px(step) << "," << py(value) << " ";
        svg << "\"/>\n";
        const double ly = t + 18.0 * static_cast<double>(ci);
        svg << "<line x1=\"" << r + 10 << "\" y1=\"" << ly << "\" x2=\"" << r + 30 << "\" y2=\""
            << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n<text x=\"" << r + 36
            << "\" y=\"" << ly + 4 << "\" font-family=\"sans-serif\" font-size=\"12\">" << names[ci]
            << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

std::string keyframes_svg(const motion::PoseSequence& pose, const motion::SkeletonSpec& skeleton,
                          int n_keyframes) {
    if (n_keyframes < 1) throw ValidationError("plot: need at least one keyframe");
    if (pose.joint_count() != skeleton.joint_count)
        throw ValidationError("plot: pose has " + std::to_string(pose.joint_count()) +
                              " joints, skeleton " + std::to_string(skeleton.joint_count));
    const Tensor xyz = motion::forward_kinematics(pose, skeleton);
    const int n = pose.n_frames();
    const int j_count = skeleton.joint_count;
    const int shown = std::min(n_keyframes, n);

    std::vector<int> frames;
    for (int k = 0; k < shown; ++k)
        frames.push_back(shown == 1 ? 0 : static_cast<int>(std::lround(
                                              static_cast<double>(k) * (n - 1) / (shown - 1))));

    // Common scale across the selected frames so motion reads left to right.
    double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
    for (int f : frames)
        for (int j = 0; j < j_count; ++j) {
            xlo = std::min(xlo, xyz(f, 3 * j));
            xhi = std::max(xhi, xyz(f, 3 * j));
            ylo = std::min(ylo, xyz(f, 3 * j + 1));
            yhi = std::max(yhi, xyz(f, 3 * j + 1));
        }
    const double span = std::max({xhi - xlo, yhi - ylo, 1e-6});
    const double cell = 150, pad = 20, scale = (cell - 2 * pad) / span;
    const double w = cell * shown, h = cell + 30;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" viewBox=\"0 0 " << w << " " << h << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (int k = 0; k < shown; ++k) {
        const int f = frames[k];
        const auto sx = [&](int j) {
            return cell * k + pad + (xyz(f, 3 * j) - xlo) * scale;
        };
        const auto sy = [&](int j) {  // SVG y grows downward
            return pad + (yhi - xyz(f, 3 * j + 1)) * scale;
        };
        for (int j = 0; j < j_count; ++j) {
            if (skeleton.parent[static_cast<size_t>(j)] >= 0) {
                const int p = skeleton.parent[static_cast<size_t>(j)];
                svg << "<line x1=\"" << sx(p) << "\" y1=\"" << sy(p) << "\" x2=\"" << sx(j)
                    << "\" y2=\"" << sy(j) << "\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n";
            }
            svg << "<circle cx=\"" << sx(j) << "\" cy=\"" << sy(j)
                << "\" r=\"2.5\" fill=\"#d62728\"/>\n";
        }
        svg << "<text x=\"" << cell * k + cell / 2 << "\" y=\"" << h - 8
            << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">frame " << f
            << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace cogest::plot
