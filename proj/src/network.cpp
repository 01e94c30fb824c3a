#include "prunelab/network.hpp"

#include <algorithm>
#include <istream>
#include <sstream>

#include "prunelab/rng.hpp"
#include "prunelab/tensor_ops.hpp"

namespace prunelab {

namespace {

struct ShapeWalker {
  LayerShape shape;
  bool flattened = false;
};

LayerShape apply_layer(ShapeWalker& w, const LayerDesc& layer, Index layer_no) {
  auto fail = [layer_no](const std::string& msg) {
    std::ostringstream os;
    os << "layer " << layer_no << ": " << msg;
    throw InvalidArgument(os.str());
  };
  if (const auto* c = std::get_if<ConvDesc>(&layer)) {
    if (w.flattened) fail("conv after flatten");
    if (c->out_channels < 1) fail("conv needs out_channels >= 1");
    if (c->kernel < 1 || c->stride < 1 || c->padding < 0) fail("bad conv geometry");
    const Index h = conv_out_extent(w.shape[1], c->kernel, c->stride, c->padding);
    const Index wd = conv_out_extent(w.shape[2], c->kernel, c->stride, c->padding);
    if (h < 1 || wd < 1) fail("conv output would be empty");
    w.shape = {c->out_channels, h, wd};
  } else if (std::holds_alternative<ReluDesc>(layer)) {
    // shape unchanged
  } else if (const auto* p = std::get_if<MaxPoolDesc>(&layer)) {
    if (w.flattened) fail("maxpool after flatten");
    if (p->kernel < 1 || p->stride < 1) fail("bad maxpool geometry");
    const Index h = pool_out_extent(w.shape[1], p->kernel, p->stride);
    const Index wd = pool_out_extent(w.shape[2], p->kernel, p->stride);
    if (h < 1 || wd < 1) fail("maxpool output would be empty");
    w.shape = {w.shape[0], h, wd};
  } else if (std::holds_alternative<FlattenDesc>(layer)) {
    if (w.flattened) fail("flatten applied twice");
    w.shape = {w.shape[0] * w.shape[1] * w.shape[2], 1, 1};
    w.flattened = true;
  } else if (const auto* d = std::get_if<DenseDesc>(&layer)) {
    if (!w.flattened) fail("dense requires flatten first");
    if (d->out_features < 1) fail("dense needs out_features >= 1");
    w.shape = {d->out_features, 1, 1};
  }
  return w.shape;
}

}  // namespace

std::vector<LayerShape> NetworkSpec::shape_trace() const {
  require(input_shape[0] >= 1 && input_shape[1] >= 1 && input_shape[2] >= 1,
          "input shape extents must be >= 1");
  require(num_classes >= 2, "num_classes must be >= 2");
  ShapeWalker w{input_shape, false};
  std::vector<LayerShape> trace;
  trace.reserve(layers.size() + 1);
  trace.push_back(input_shape);
  Index convs = 0;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    trace.push_back(apply_layer(w, layers[i], static_cast<Index>(i)));
    if (std::holds_alternative<ConvDesc>(layers[i])) ++convs;
  }
  require(convs >= 1, "network needs at least one conv layer");
  require(w.flattened && w.shape[0] == num_classes,
          "final layer must output num_classes features");
  return trace;
}

Index NetworkSpec::conv_count() const {
  Index c = 0;
  for (const auto& l : layers)
    if (std::holds_alternative<ConvDesc>(l)) ++c;
  return c;
}

Index NetworkSpec::conv_layer_position(Index conv_index) const {
  Index c = 0;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (std::holds_alternative<ConvDesc>(layers[i])) {
      if (c == conv_index) return static_cast<Index>(i);
      ++c;
    }
  }
  throw InvalidArgument("conv index out of range");
}

std::string NetworkSpec::serialize() const {
  std::ostringstream os;
  os << "input " << input_shape[0] << " " << input_shape[1] << " " << input_shape[2] << "\n";
  os << "classes " << num_classes << "\n";
  for (const auto& l : layers) {
    if (const auto* c = std::get_if<ConvDesc>(&l)) {
      os << "conv out=" << c->out_channels << " k=" << c->kernel << " s=" << c->stride
         << " p=" << c->padding << "\n";
    } else if (std::holds_alternative<ReluDesc>(l)) {
      os << "relu\n";
    } else if (const auto* p = std::get_if<MaxPoolDesc>(&l)) {
      os << "maxpool k=" << p->kernel << " s=" << p->stride << "\n";
    } else if (std::holds_alternative<FlattenDesc>(l)) {
      os << "flatten\n";
    } else if (const auto* d = std::get_if<DenseDesc>(&l)) {
      os << "dense out=" << d->out_features << "\n";
    }
  }
  return os.str();
}

namespace {

Index parse_kv(const std::string& token, const std::string& key, int line_no) {
  auto fail = [&](const std::string& msg) {
    std::ostringstream os;
    os << "netspec line " << line_no << ": " << msg;
    throw InvalidArgument(os.str());
  };
  const auto eq = token.find('=');
  if (eq == std::string::npos || token.substr(0, eq) != key)
    fail("expected " + key + "=<int>, got '" + token + "'");
  try {
    return std::stoll(token.substr(eq + 1));
  } catch (const std::exception&) {
    fail("bad integer in '" + token + "'");
  }
  return 0;
}

}  // namespace

NetworkSpec NetworkSpec::parse(std::istream& in) {
  NetworkSpec spec;
  spec.layers.clear();
  std::string line;
  int line_no = 0;
  bool saw_input = false, saw_classes = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    auto fail = [&](const std::string& msg) {
      std::ostringstream os;
      os << "netspec line " << line_no << ": " << msg;
      throw InvalidArgument(os.str());
    };
    std::vector<std::string> args;
    std::string tok;
    while (ls >> tok) args.push_back(tok);
    if (word == "input") {
      if (args.size() != 3) fail("input expects 3 extents");
      for (int i = 0; i < 3; ++i) {
        try {
          spec.input_shape[static_cast<std::size_t>(i)] = std::stoll(args[static_cast<std::size_t>(i)]);
        } catch (const std::exception&) {
          fail("bad extent '" + args[static_cast<std::size_t>(i)] + "'");
        }
      }
      saw_input = true;
    } else if (word == "classes") {
      if (args.size() != 1) fail("classes expects one integer");
      try {
        spec.num_classes = std::stoll(args[0]);
      } catch (const std::exception&) {
        fail("bad integer '" + args[0] + "'");
      }
      saw_classes = true;
    } else if (word == "conv") {
      if (args.size() != 4) fail("conv expects out= k= s= p=");
      ConvDesc c;
      c.out_channels = parse_kv(args[0], "out", line_no);
      c.kernel = parse_kv(args[1], "k", line_no);
      c.stride = parse_kv(args[2], "s", line_no);
      c.padding = parse_kv(args[3], "p", line_no);
      spec.layers.emplace_back(c);
    } else if (word == "relu") {
      if (!args.empty()) fail("relu takes no arguments");
      spec.layers.emplace_back(ReluDesc{});
    } else if (word == "maxpool") {
      if (args.size() != 2) fail("maxpool expects k= s=");
      MaxPoolDesc p;
      p.kernel = parse_kv(args[0], "k", line_no);
      p.stride = parse_kv(args[1], "s", line_no);
      spec.layers.emplace_back(p);
    } else if (word == "flatten") {
      if (!args.empty()) fail("flatten takes no arguments");
      spec.layers.emplace_back(FlattenDesc{});
    } else if (word == "dense") {
      if (args.size() != 1) fail("dense expects out=");
      DenseDesc d;
      d.out_features = parse_kv(args[0], "out", line_no);
      spec.layers.emplace_back(d);
    } else {
      fail("unknown layer '" + word + "'");
    }
  }
  require(saw_input, "netspec missing 'input' line");
  require(saw_classes, "netspec missing 'classes' line");
  spec.validate();
  return spec;
}

NetworkSpec NetworkSpec::parse_string(const std::string& text) {
  std::istringstream is(text);
  return parse(is);
}

Index Network::param_count() const {
  Index n = 0;
  for (const auto& w : weights) n += w.size();
  for (const auto& b : biases) n += b.size();
  return n;
}

std::vector<Index> Network::conv_census() const {
  std::vector<Index> census;
  for (const auto& l : spec.layers)
    if (const auto* c = std::get_if<ConvDesc>(&l)) census.push_back(c->out_channels);
  return census;
}

Index Network::conv_param_index(Index conv_index) const {
  Index param = 0, conv = 0;
  for (const auto& l : spec.layers) {
    if (std::holds_alternative<ConvDesc>(l)) {
      if (conv == conv_index) return param;
      ++conv;
      ++param;
    } else if (std::holds_alternative<DenseDesc>(l)) {
      ++param;
    }
  }
  throw InvalidArgument("conv index out of range");
}

namespace {

Tensor he_init(std::vector<Index> shape, Index fan_in, Rng& rng) {
  Tensor t(std::move(shape));
  std::normal_distribution<double> g(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
  for (Index i = 0; i < t.size(); ++i) t[i] = g(rng);
  return t;
}

/// Position in `layers` of the next weight-bearing layer after `pos`, or -1.
Index consumer_position(const NetworkSpec& spec, Index pos) {
  for (std::size_t i = static_cast<std::size_t>(pos) + 1; i < spec.layers.size(); ++i) {
    if (std::holds_alternative<ConvDesc>(spec.layers[i]) ||
        std::holds_alternative<DenseDesc>(spec.layers[i]))
      return static_cast<Index>(i);
  }
  return -1;
}

Index param_index_of_position(const NetworkSpec& spec, Index pos) {
  Index param = 0;
  for (Index i = 0; i < pos; ++i) {
    if (std::holds_alternative<ConvDesc>(spec.layers[static_cast<std::size_t>(i)]) ||
        std::holds_alternative<DenseDesc>(spec.layers[static_cast<std::size_t>(i)]))
      ++param;
  }
  return param;
}

/// height*width of one channel at the flatten point between pos and the dense
/// consumer; needed to map removed channels to dense input columns.
Index flatten_block_size(const NetworkSpec& spec, Index conv_pos, Index dense_pos) {
  const auto trace = spec.shape_trace();
  for (Index i = conv_pos + 1; i < dense_pos; ++i) {
    if (std::holds_alternative<FlattenDesc>(spec.layers[static_cast<std::size_t>(i)])) {
      const LayerShape before = trace[static_cast<std::size_t>(i)];  // flatten input
      return before[1] * before[2];
    }
  }
  throw InvalidArgument("dense consumer without flatten between conv and dense");
}

}  // namespace

Network build_network(const NetworkSpec& spec, std::uint64_t init_seed) {
  spec.validate();
  const auto trace = spec.shape_trace();
  Network net;
  net.spec = spec;
  Rng rng = make_rng(init_seed);
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerShape in_shape = trace[i];
    if (const auto* c = std::get_if<ConvDesc>(&spec.layers[i])) {
      const Index fan_in = in_shape[0] * c->kernel * c->kernel;
      net.weights.push_back(
          he_init({c->out_channels, in_shape[0], c->kernel, c->kernel}, fan_in, rng));
      net.biases.push_back(Tensor({c->out_channels}));
    } else if (const auto* d = std::get_if<DenseDesc>(&spec.layers[i])) {
      net.weights.push_back(he_init({d->out_features, in_shape[0]}, in_shape[0], rng));
      net.biases.push_back(Tensor({d->out_features}));
    }
  }
  return net;
}

Network widen_layer(const Network& net, Index conv_index, Index factor, std::uint64_t init_seed) {
  require(factor >= 2, "widen_layer requires factor >= 2");
  require(conv_index >= 0 && conv_index < net.spec.conv_count(), "conv index out of range");
  const Index pos = net.spec.conv_layer_position(conv_index);
  const Index consumer = consumer_position(net.spec, pos);
  require(consumer >= 0, "cannot widen a conv layer with no consumer layer");

  const auto& conv = std::get<ConvDesc>(net.spec.layers[static_cast<std::size_t>(pos)]);
  const Index old_out = conv.out_channels;
  const Index new_out = old_out * factor;
  const Index param = param_index_of_position(net.spec, pos);
  const Index cons_param = param_index_of_position(net.spec, consumer);

  Network out = net;
  std::get<ConvDesc>(out.spec.layers[static_cast<std::size_t>(pos)]).out_channels = new_out;
  out.spec.validate();
  Rng rng = make_rng(init_seed);

  // Widened conv: original filters first, fresh filters appended.
  {
    const Tensor& w = net.weights[static_cast<std::size_t>(param)];
    const Index ci = w.extent(1), k = w.extent(2);
    Tensor fresh = he_init({new_out - old_out, ci, k, k}, ci * k * k, rng);
    Tensor nw({new_out, ci, k, k});
    std::copy(w.data(), w.data() + w.size(), nw.data());
    std::copy(fresh.data(), fresh.data() + fresh.size(), nw.data() + w.size());
    Tensor nb({new_out});
    std::copy(net.biases[static_cast<std::size_t>(param)].data(),
              net.biases[static_cast<std::size_t>(param)].data() + old_out, nb.data());
    out.weights[static_cast<std::size_t>(param)] = std::move(nw);
    out.biases[static_cast<std::size_t>(param)] = std::move(nb);
  }

  // Consumer: enlarge the input dimension, fresh slices for the new channels.
  const Tensor& cw = net.weights[static_cast<std::size_t>(cons_param)];
  if (std::holds_alternative<ConvDesc>(net.spec.layers[static_cast<std::size_t>(consumer)])) {
    const Index co = cw.extent(0), k = cw.extent(2);
    Tensor nw({co, new_out, k, k});
    Tensor fresh = he_init({co, new_out - old_out, k, k}, new_out * k * k, rng);
    for (Index o = 0; o < co; ++o) {
      std::copy(cw.data() + o * old_out * k * k, cw.data() + (o + 1) * old_out * k * k,
                nw.data() + o * new_out * k * k);
      std::copy(fresh.data() + o * (new_out - old_out) * k * k,
                fresh.data() + (o + 1) * (new_out - old_out) * k * k,
                nw.data() + (o * new_out + old_out) * k * k);
    }
    out.weights[static_cast<std::size_t>(cons_param)] = std::move(nw);
  } else {
    const Index block = flatten_block_size(net.spec, pos, consumer);
    const Index o_dim = cw.extent(0);
    const Index new_f = new_out * block;
    Tensor nw({o_dim, new_f});
    Tensor fresh = he_init({o_dim, (new_out - old_out) * block}, new_f, rng);
    for (Index o = 0; o < o_dim; ++o) {
      std::copy(cw.data() + o * old_out * block, cw.data() + (o + 1) * old_out * block,
                nw.data() + o * new_f);
      std::copy(fresh.data() + o * (new_out - old_out) * block,
                fresh.data() + (o + 1) * (new_out - old_out) * block,
                nw.data() + o * new_f + old_out * block);
    }
    out.weights[static_cast<std::size_t>(cons_param)] = std::move(nw);
  }
  return out;
}

Network remove_filters(const Network& net, Index conv_index,
                       const std::vector<Index>& filter_ids) {
  require(!filter_ids.empty(), "remove_filters: empty filter list");
  require(conv_index >= 0 && conv_index < net.spec.conv_count(), "conv index out of range");
  const Index pos = net.spec.conv_layer_position(conv_index);
  const auto& conv = std::get<ConvDesc>(net.spec.layers[static_cast<std::size_t>(pos)]);
  const Index old_out = conv.out_channels;
  for (std::size_t i = 0; i < filter_ids.size(); ++i) {
    require(filter_ids[i] >= 0 && filter_ids[i] < old_out, "filter id out of range");
    if (i > 0) require(filter_ids[i] > filter_ids[i - 1], "filter ids must be sorted and unique");
  }
  const Index removed = static_cast<Index>(filter_ids.size());
  require(removed < old_out, "cannot remove every filter of a layer");
  const Index consumer = consumer_position(net.spec, pos);
  require(consumer >= 0, "cannot prune a conv layer with no consumer layer");

  std::vector<Index> keep;
  keep.reserve(static_cast<std::size_t>(old_out - removed));
  {
    std::size_t j = 0;
    for (Index c = 0; c < old_out; ++c) {
      if (j < filter_ids.size() && filter_ids[j] == c) {
        ++j;
      } else {
        keep.push_back(c);
      }
    }
  }
  const Index new_out = static_cast<Index>(keep.size());
  const Index param = param_index_of_position(net.spec, pos);
  const Index cons_param = param_index_of_position(net.spec, consumer);

  Network out = net;
  std::get<ConvDesc>(out.spec.layers[static_cast<std::size_t>(pos)]).out_channels = new_out;
  out.spec.validate();

  {
    const Tensor& w = net.weights[static_cast<std::size_t>(param)];
    const Index slice = w.extent(1) * w.extent(2) * w.extent(3);
    Tensor nw({new_out, w.extent(1), w.extent(2), w.extent(3)});
    Tensor nb({new_out});
    for (Index i = 0; i < new_out; ++i) {
      std::copy(w.data() + keep[static_cast<std::size_t>(i)] * slice,
                w.data() + (keep[static_cast<std::size_t>(i)] + 1) * slice, nw.data() + i * slice);
      nb[i] = net.biases[static_cast<std::size_t>(param)][keep[static_cast<std::size_t>(i)]];
    }
    out.weights[static_cast<std::size_t>(param)] = std::move(nw);
    out.biases[static_cast<std::size_t>(param)] = std::move(nb);
  }

  const Tensor& cw = net.weights[static_cast<std::size_t>(cons_param)];
  if (std::holds_alternative<ConvDesc>(net.spec.layers[static_cast<std::size_t>(consumer)])) {
    const Index co = cw.extent(0), k = cw.extent(2);
    const Index kk = k * k;
    Tensor nw({co, new_out, k, k});
    for (Index o = 0; o < co; ++o) {
      for (Index i = 0; i < new_out; ++i) {
        std::copy(cw.data() + (o * old_out + keep[static_cast<std::size_t>(i)]) * kk,
                  cw.data() + (o * old_out + keep[static_cast<std::size_t>(i)] + 1) * kk,
                  nw.data() + (o * new_out + i) * kk);
      }
    }
    out.weights[static_cast<std::size_t>(cons_param)] = std::move(nw);
  } else {
    const Index block = flatten_block_size(net.spec, pos, consumer);
    const Index o_dim = cw.extent(0);
    Tensor nw({o_dim, new_out * block});
    for (Index o = 0; o < o_dim; ++o) {
      for (Index i = 0; i < new_out; ++i) {
        std::copy(cw.data() + (o * old_out + keep[static_cast<std::size_t>(i)]) * block,
                  cw.data() + o * old_out * block + (keep[static_cast<std::size_t>(i)] + 1) * block,
                  nw.data() + (o * new_out + i) * block);
      }
    }
    out.weights[static_cast<std::size_t>(cons_param)] = std::move(nw);
  }
  return out;
}

namespace {
Index scaled(Index width, Index divisor) {
  const Index w = width / divisor;
  require(w >= 1, "width divisor too large");
  return w;
}
}  // namespace

NetworkSpec minicnn_a(Index width_divisor) {
  require(width_divisor >= 1, "width divisor must be >= 1");
  NetworkSpec s;
  s.input_shape = {3, 32, 32};
  s.num_classes = 10;
  s.layers = {
      ConvDesc{scaled(16, width_divisor), 3, 2, 1}, ReluDesc{}, MaxPoolDesc{2, 2},
      ConvDesc{scaled(32, width_divisor), 3, 1, 1}, ReluDesc{}, MaxPoolDesc{2, 2},
      ConvDesc{scaled(64, width_divisor), 3, 1, 1}, ReluDesc{},
      ConvDesc{scaled(32, width_divisor), 3, 1, 1}, ReluDesc{}, MaxPoolDesc{2, 2},
      FlattenDesc{}, DenseDesc{scaled(64, width_divisor)}, ReluDesc{}, DenseDesc{10},
  };
  s.validate();
  return s;
}

NetworkSpec minicnn_v(Index width_divisor) {
  require(width_divisor >= 1, "width divisor must be >= 1");
  NetworkSpec s;
  s.input_shape = {3, 32, 32};
  s.num_classes = 10;
  auto block = [&](Index width) {
    s.layers.emplace_back(ConvDesc{width, 3, 1, 1});
    s.layers.emplace_back(ReluDesc{});
    s.layers.emplace_back(ConvDesc{width, 3, 1, 1});
    s.layers.emplace_back(ReluDesc{});
    s.layers.emplace_back(MaxPoolDesc{2, 2});
  };
  block(scaled(16, width_divisor));
  block(scaled(32, width_divisor));
  block(scaled(64, width_divisor));
  block(scaled(64, width_divisor));
  s.layers.emplace_back(FlattenDesc{});
  s.layers.emplace_back(DenseDesc{scaled(64, width_divisor)});
  s.layers.emplace_back(ReluDesc{});
  s.layers.emplace_back(DenseDesc{10});
  s.validate();
  return s;
}

}  // namespace prunelab
