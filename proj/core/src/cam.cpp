#include "aream/cam.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace aream {

Tensor compute_raw_cam(const Tensor& features, const Tensor& classifier,
                       const std::vector<bool>& present) {
    if (features.rank() != 3 || classifier.rank() != 2) {
        throw std::invalid_argument("compute_raw_cam: features must be DxHxW, classifier DxC");
    }
    const std::size_t d = features.extent(0);
    const std::size_t h = features.extent(1);
    const std::size_t w = features.extent(2);
    if (classifier.extent(0) != d) {
        throw std::invalid_argument("compute_raw_cam: feature dim " + std::to_string(d) +
                                    " != classifier rows " + std::to_string(classifier.extent(0)));
    }
    const std::size_t c = classifier.extent(1);
    if (present.size() != c) {
        throw std::invalid_argument("compute_raw_cam: present mask length " +
                                    std::to_string(present.size()) + " != class count " +
                                    std::to_string(c));
    }
    if (std::none_of(present.begin(), present.end(), [](bool b) { return b; })) {
        throw std::invalid_argument("compute_raw_cam: no present class");
    }

    Tensor out({c, h, w});
    const std::size_t plane = h * w;
    auto f = features.data();
    auto o = out.data();
    for (std::size_t cls = 0; cls < c; ++cls) {
        if (!present[cls]) continue;  // absent channels stay zero
        for (std::size_t dd = 0; dd < d; ++dd) {
            const double weight = classifier(dd, cls);
            if (weight == 0.0) continue;
            for (std::size_t p = 0; p < plane; ++p) {
                o[cls * plane + p] += weight * f[dd * plane + p];
            }
        }
        for (std::size_t p = 0; p < plane; ++p) {
            o[cls * plane + p] = std::max(0.0, o[cls * plane + p]);
        }
    }
    return out;
}

CamStack normalize_cam(const Tensor& raw, const std::vector<bool>& present) {
    if (raw.rank() != 3) {
        throw std::invalid_argument("normalize_cam: raw maps must be CxHxW");
    }
    if (present.size() != raw.extent(0)) {
        throw std::invalid_argument("normalize_cam: present mask length mismatch");
    }
    const std::size_t c = raw.extent(0);
    const std::size_t plane = raw.extent(1) * raw.extent(2);

    CamStack stack{Tensor(raw.shape()), present};
    auto src = raw.data();
    auto dst = stack.maps.data();
    for (std::size_t cls = 0; cls < c; ++cls) {
        if (!present[cls]) continue;
        Tensor channel = Tensor::from_data(
            {plane}, std::vector<double>(src.begin() + cls * plane,
                                         src.begin() + (cls + 1) * plane));
        Tensor norm = minmax_normalize(channel);
        std::copy(norm.data().begin(), norm.data().end(), dst.begin() + cls * plane);
    }
    return stack;
}

}  // namespace aream
