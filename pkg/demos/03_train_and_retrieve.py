"""Train on synthetic tables and retrieve complements for a held-out query.

Training pairs come from random splits of the training objects; every other
pair in the batch serves as a negative.  Takes about half a minute.

    python3 demos/03_train_and_retrieve.py
"""

from dualfuzzy import EmbedConfig, LossConfig, train
from dualfuzzy.retrieval import (
    build_index,
    evaluate_complements,
    retrieve_complements,
    retrieve_interchangeable,
)
from dualfuzzy.shapes import GeneratorConfig, generate_synthetic_dataset

ds = generate_synthetic_dataset(GeneratorConfig("table", 20), rng_seed=0)
print(f"{len(ds.train)} training objects, {len(ds.test)} test objects")

result = train(ds.train, LossConfig(mode="threshold", epochs=60, batch_size=8),
               EmbedConfig(dim=16, points=512))
for row in result.log[::10]:
    print(f"epoch {row['epoch']:3d}  loss {row['mean_loss']:.4f}")

index = build_index(result.params, ds.test)
print(f"\nindex of {len(index)} partial shapes from the test objects")

obj = ds.test[0]
query_id = index.ids[[i for i, o in enumerate(index.object_ids) if o == obj.id][0]]
query = index.embedding(query_id)
print("query", query_id)
print("best complements:")
for cid, energy in retrieve_complements(index, query, 5):
    print(f"  {energy:9.5f}  {cid}")
print("most interchangeable (itself first, at zero):")
for cid, energy in retrieve_interchangeable(index, query, 3):
    print(f"  {energy:9.5f}  {cid}")

metrics = evaluate_complements(result.params, ds.test)
print(f"\nRecall@10 {metrics['recall_at_10']:.1f} against a random baseline of "
      f"{metrics['random_recall_at_10']:.1f}")
