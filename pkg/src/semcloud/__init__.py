"""semcloud: declarative ETL pipelines with learned cloud resource configuration.

Subpackages:
    kg        -- pipeline knowledge-graph model, document parsing, fact export
    datalog   -- non-recursive Datalog engine with aggregates and externals
    learning  -- PolyR / MLP / KNN fitting of the external functions
    optimizer -- chunk/slice size search minimising predicted total time
    etl       -- heterogeneous-source ingestion, unification, slicing, storage
    sim       -- event-driven cluster simulator and single-node legacy baseline
"""

__version__ = "0.1.0"
