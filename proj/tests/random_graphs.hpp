#pragma once

// Shared generator for desk-scale chain graphs (random pipelines over the
// spatial op set, extents capped so full execution stays cheap).

#include <string>
#include <vector>

#include "framepipe/memcost.hpp"
#include "framepipe/rng.hpp"

inline framepipe::OpGraph random_chain_graph(framepipe::Rng& rng, long long max_hw = 64) {
    using namespace framepipe;
    static const long long kChannels[] = {1, 2, 4, 8};
    static const long long kExtents[] = {8, 12, 16, 24, 32};

    OpGraph g;
    long long c = kChannels[rng.below(4)];
    long long h = kExtents[rng.below(5)];
    long long w = kExtents[rng.below(5)];

    auto add_tensor = [&](const std::string& id, std::vector<long long> dims) {
        TensorSpec t;
        t.id = id;
        t.dims = std::move(dims);
        g.tensors[id] = t;
    };

    add_tensor("t0", {1, c, h, w});
    int n_ops = 3 + static_cast<int>(rng.below(4));
    std::string cur = "t0";
    for (int i = 0; i < n_ops; ++i) {
        enum Kind { kUp, kConv, kGn, kSilu, kAdd };
        std::vector<Kind> candidates = {kConv, kSilu, kAdd};
        if (2 * h <= max_hw && 2 * w <= max_hw) candidates.push_back(kUp);
        if (c % 2 == 0) candidates.push_back(kGn);
        Kind kind = candidates[rng.below(candidates.size())];

        OpNode n;
        n.id = "op" + std::to_string(i);
        n.inputs = {cur};
        n.output = "t" + std::to_string(i + 1);
        switch (kind) {
            case kUp:
                n.kind = OpKind::upsample_nearest2x;
                h *= 2;
                w *= 2;
                break;
            case kConv: {
                n.kind = OpKind::conv3x3;
                long long c_out = kChannels[rng.below(4)];
                std::string wid = "w" + std::to_string(i);
                add_tensor(wid, {c_out, c, 3, 3});
                n.weight = wid;
                c = c_out;
                break;
            }
            case kGn:
                n.kind = OpKind::group_norm;
                n.gn_groups = (c >= 4 && rng.bernoulli(0.5)) ? 2 : 1;
                break;
            case kSilu:
                n.kind = OpKind::silu;
                break;
            case kAdd: {
                n.kind = OpKind::elementwise_add;
                std::string rid = "r" + std::to_string(i);
                add_tensor(rid, {1, c, h, w});
                n.inputs.push_back(rid);
                break;
            }
        }
        add_tensor(n.output, {1, c, h, w});
        cur = n.output;
        g.nodes.push_back(std::move(n));
    }
    g.validate();
    return g;
}
