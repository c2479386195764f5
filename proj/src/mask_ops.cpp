// Copyright (C) 2026 ObjectAdd contributors
// SPDX-License-Identifier: Apache-2.0

#include "objectadd/mask_ops.hpp"

#include "objectadd/error.hpp"

namespace objectadd {

namespace {

int block_begin(int i, int source, int target) {
    return static_cast<int>(static_cast<long long>(i) * source / target);
}

}  // namespace

BinaryMask downsample_mask(const BinaryMask& mask, Extent target, ResolutionTag tag) {
    if (target.rows <= 0 || target.cols <= 0) throw Error(ErrorKind::Resolution, "empty target resolution");
    if (target.rows > mask.rows() || target.cols > mask.cols())
        throw Error(ErrorKind::Resolution, "downsample target larger than source");

    BinaryMask out(target.rows, target.cols, false, tag);
    for (int i = 0; i < target.rows; ++i) {
        const int r0 = block_begin(i, mask.rows(), target.rows);
        const int r1 = block_begin(i + 1, mask.rows(), target.rows);
        for (int j = 0; j < target.cols; ++j) {
            const int c0 = block_begin(j, mask.cols(), target.cols);
            const int c1 = block_begin(j + 1, mask.cols(), target.cols);
            int ones = 0;
            for (int r = r0; r < r1; ++r)
                for (int c = c0; c < c1; ++c) ones += mask(r, c) ? 1 : 0;
            const int total = (r1 - r0) * (c1 - c0);
            // ties map to 1
            out.set(i, j, 2 * ones >= total);
        }
    }
    return out;
}

BinaryMask upsample_mask(const BinaryMask& mask, Extent target, ResolutionTag tag) {
    if (target.rows < mask.rows() || target.cols < mask.cols())
        throw Error(ErrorKind::Resolution, "upsample target smaller than source");
    BinaryMask out(target.rows, target.cols, false, tag);
    for (int i = 0; i < target.rows; ++i) {
        const int r = block_begin(i, mask.rows(), target.rows);
        for (int j = 0; j < target.cols; ++j) out.set(i, j, mask(r, block_begin(j, mask.cols(), target.cols)));
    }
    return out;
}

BinaryMask resample_mask(const BinaryMask& mask, Extent target, ResolutionTag tag) {
    if (target.rows <= mask.rows() && target.cols <= mask.cols()) return downsample_mask(mask, target, tag);
    if (target.rows >= mask.rows() && target.cols >= mask.cols()) return upsample_mask(mask, target, tag);
    throw Error(ErrorKind::Resolution, "mixed up/down resampling is not supported");
}

BinaryMask box_to_mask(const Box& box, Extent image) {
    if (!box.inside(image.rows, image.cols)) throw Error(ErrorKind::Config, "box lies outside the image bounds");
    BinaryMask m(image.rows, image.cols, false, ResolutionTag::full());
    for (int r = box.top; r < box.top + box.height; ++r)
        for (int c = box.left; c < box.left + box.width; ++c) m.set(r, c, true);
    return m;
}

Grid<double> mask_to_real(const BinaryMask& mask) {
    Grid<double> g(mask.rows(), mask.cols());
    for (int r = 0; r < mask.rows(); ++r)
        for (int c = 0; c < mask.cols(); ++c) g(r, c) = mask(r, c) ? 1.0 : 0.0;
    return g;
}

}  // namespace objectadd
