"""Regenerate the bundled data files that are awkward to maintain by hand.

Produces:

* ``src/nl2query/data/lexicon.txt`` -- 500 plain words used when sampling
  text-valued constraints.  The list is kept disjoint from every class and
  attribute name in the bundled schemas so token-counting assertions in the
  test-suite stay unambiguous.
* ``src/nl2query/data/warehouse_tier.json`` -- a 52-class logistics schema
  with heavy attribute-name reuse across classes, mimicking the shape of a
  large production warehouse model.

The outputs are committed; rerun only when deliberately changing them.
"""

from __future__ import annotations

import json
import pathlib

import numpy as np

DATA_DIR = pathlib.Path(__file__).resolve().parents[1] / "src" / "nl2query" / "data"

# --------------------------------------------------------------------------
# lexicon
# --------------------------------------------------------------------------

WORD_GROUPS = {
    "colors": """
        amber azure beige bronze burgundy charcoal cobalt coral crimson cyan
        ebony emerald fuchsia gold indigo ivory jade khaki lavender lilac
        magenta maroon mauve mint navy ochre olive onyx opal pearl pewter
        plum rosewood ruby rust saffron sapphire scarlet sienna silver slate
        tan teal topaz turquoise umber vermilion violet
    """,
    "animals": """
        badger bat beaver bison bobcat buffalo camel caribou cheetah chipmunk
        cougar coyote crane crow cuckoo deer dingo dolphin donkey dove eagle
        egret elk falcon ferret finch fox gazelle gecko gibbon giraffe goose
        gopher grouse gull hamster hare hawk hedgehog heron hyena ibex iguana
        jackal jaguar kestrel kiwi koala lemming lemur leopard llama lynx
        magpie marmot marten mink mole moose mouse newt ocelot orca osprey
        otter owl panther parrot pelican penguin pheasant pigeon porcupine
        puffin puma quail rabbit raccoon raven reindeer robin salamander
        shrew skunk sloth sparrow squirrel starling stoat stork swan tapir
        toad toucan trout turtle vole vulture walrus weasel wolverine wombat
        woodpecker wren yak zebra
    """,
    "plants": """
        acacia alder ash aspen bamboo basil birch bracken cedar chestnut
        clover cypress dogwood elder elm fennel fern fir hawthorn hazel
        heather hemlock hickory holly juniper laurel lichen linden magnolia
        mahogany maple marigold moss myrtle nettle oak orchid pine poplar
        primrose reed rowan sage sequoia spruce sycamore tamarind thistle
        thyme tulip walnut willow yarrow yew
    """,
    "minerals": """
        agate basalt calcite chalk feldspar flint gneiss granite gypsum
        limestone marble mica obsidian pumice quartz sandstone schist shale
        talc tuff
    """,
    "weather": """
        blizzard breeze cloudburst downpour drizzle fog frost gale hail haze
        monsoon rainbow sleet squall sunshine tempest thaw thunder whirlwind
        zephyr
    """,
    "places": """
        archipelago basin bay bluff canyon cape cavern cove crag delta dune
        estuary fjord glacier glen gorge grotto gulch harbor headland hollow
        islet isthmus knoll lagoon marsh meadow mesa moor oasis peninsula
        plateau prairie ravine reef ridge savanna steppe summit tundra vale
    """,
    "foods": """
        almond apricot barley basmati brioche cashew chutney cinnamon clove
        cocoa couscous cumin currant fig ginger hazelnut honeycomb lentil
        mango marzipan molasses nougat nutmeg oat paprika pecan pistachio
        pomegranate pretzel quince raisin rhubarb rye saffranate semolina
        sorghum tapioca truffle vanilla walnutte
    """,
    "crafts": """
        anvil awl bellows bobbin chisel compass crucible easel forge gouge
        kiln lathe loom mallet mortar pestle plane pulley quill spindle
        stencil trowel vise whetstone
    """,
    "adjectives": """
        agile ancient arid bold brisk calm candid clever crisp daring deft
        dusky eager earnest fabled fleet gentle hardy hazy humble keen limber
        lively lucid mellow nimble placid plucky quaint quiet rugged serene
        shrewd sleek solemn spry stark steady stern stout sturdy subtle
        supple swift tranquil vivid wary witty zesty
    """,
    "misc": """
        anchor beacon bugle carousel compassrose cresset dynamo ember flotilla
        gondola hammock hourglass kaleidoscope lantern medley mosaic nocturne
        obelisk pavilion pennant quartet rivulet scepter sonnet tapestry
        totem turret vellum waltz zenith
    """,
    "astronomy": """
        aurora comet eclipse equinox meteor nebula parallax perihelion pulsar
        quasar solstice zodiac
    """,
    "fabrics": """
        burlap calico chiffon corduroy damask denim flannel gingham linen
        muslin organza paisley satin suede taffeta tweed velvet
    """,
    "music": """
        adagio allegro aria ballad cadence chorale concerto etude fugue hymn
        interlude lullaby madrigal mazurka minuet opus overture prelude
        rhapsody rondo serenade symphony toccata vibrato
    """,
    "vessels": """
        barge brig caravel catamaran clipper corvette cutter dinghy frigate
        galleon ketch schooner skiff sloop yawl
    """,
}


def build_lexicon() -> list[str]:
    words: list[str] = []
    seen: set[str] = set()
    for group in WORD_GROUPS.values():
        for word in group.split():
            if word not in seen:
                seen.add(word)
                words.append(word)
    return words


# --------------------------------------------------------------------------
# warehouse schema
# --------------------------------------------------------------------------

WAREHOUSE_CLASSES = """
    account aisle allocation asset audit batch bin carrier carton cell
    channel claim consignment container contract crate customs cycle damage
    depot dispatch dock driver forecast forklift freight hub inspection
    inventory invoice label lane loadplan locationzone manifest packline
    pallet parcel pickwave quota rack refund replenishment returncase route
    scanner seal shipment slot stocktake tariff trailer waybill
"""

# Shared attribute pool; most classes draw most of their attributes from
# here so the same attribute name occurs in many classes, as in large
# organically grown warehouse models.
SHARED_ATTRIBUTES = [
    ("code", "text"), ("name", "text"), ("status", "text"),
    ("createdon", "text"), ("updatedon", "text"), ("notes", "text"),
    ("priority", "integer"), ("capacity", "integer"), ("weightkg", "real"),
    ("volume", "real"), ("lengthcm", "integer"), ("widthcm", "integer"),
    ("heightcm", "integer"), ("active", "boolean"), ("locked", "boolean"),
    ("sequence", "integer"), ("revision", "integer"), ("cost", "real"),
    ("declaredvalue", "real"), ("owner", "text"), ("site", "text"),
    ("temperature", "real"), ("humidity", "real"), ("barcode", "text"),
    ("batchref", "text"), ("zone", "text"), ("carrierref", "text"),
    ("origin", "text"), ("destination", "text"), ("eta", "text"),
    ("etd", "text"), ("remarks", "text"), ("units", "integer"),
    ("grossweight", "real"), ("netweight", "real"), ("hazardous", "boolean"),
    ("fragile", "boolean"), ("insured", "boolean"), ("currencycode", "text"),
    ("amount", "real"), ("taxrate", "real"), ("dutiespaid", "boolean"),
    ("inspectorid", "text"), ("approvedby", "text"), ("closedon", "text"),
    ("openedon", "text"), ("durationmin", "integer"), ("distancekm", "real"),
    ("fuelcost", "real"), ("category", "text"),
]


def build_warehouse(rng: np.random.Generator) -> dict:
    names = WAREHOUSE_CLASSES.split()
    assert len(names) == len(set(names))

    classes = []
    for name in names:
        n_attrs = int(rng.integers(4, 10))
        picks = rng.choice(len(SHARED_ATTRIBUTES), size=n_attrs, replace=False)
        attrs = [SHARED_ATTRIBUTES[i] for i in sorted(picks)]
        classes.append({
            "name": name,
            "instance_count": int(rng.integers(100, 500_000)),
            "attributes": [
                {"name": a, "value_kind": k} for a, k in attrs
            ],
        })

    # A random spanning tree keeps the graph connected; extra cross edges
    # give the traversal sampler some cycles to wander through.
    edges: list[tuple[str, str]] = []
    present = [names[0]]
    for name in names[1:]:
        anchor = present[int(rng.integers(len(present)))]
        edges.append((name, anchor))
        present.append(name)
    have = {frozenset(e) for e in edges}
    while len(edges) < len(names) + 9:
        a, b = rng.choice(len(names), size=2, replace=False)
        pair = frozenset((names[a], names[b]))
        if pair not in have:
            have.add(pair)
            edges.append((names[a], names[b]))

    relationships = [
        {"from": frm, "to": to, "label": f"{to}_id"} for frm, to in edges
    ]
    return {"classes": classes, "relationships": relationships}


def main() -> None:
    lexicon = build_lexicon()
    rng = np.random.default_rng(20240817)
    warehouse = build_warehouse(rng)

    fixture_names: set[str] = set()
    for path in (DATA_DIR / "graph_tier.json", DATA_DIR / "relational_tier.json"):
        doc = json.loads(path.read_text())
        for cls in doc["classes"]:
            fixture_names.add(cls["name"])
            fixture_names.update(a["name"] for a in cls["attributes"])
    for cls in warehouse["classes"]:
        fixture_names.add(cls["name"])
        fixture_names.update(a["name"] for a in cls["attributes"])

    clash = fixture_names & set(lexicon)
    if clash:
        raise SystemExit(f"lexicon words collide with schema names: {sorted(clash)}")
    if len(lexicon) != 500:
        raise SystemExit(f"expected 500 lexicon words, built {len(lexicon)}")

    (DATA_DIR / "lexicon.txt").write_text("\n".join(lexicon) + "\n")
    (DATA_DIR / "warehouse_tier.json").write_text(
        json.dumps(warehouse, indent=2) + "\n"
    )
    print(f"wrote {len(lexicon)} lexicon words and "
          f"{len(warehouse['classes'])}-class warehouse schema")


if __name__ == "__main__":
    main()
