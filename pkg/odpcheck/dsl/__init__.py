"""Concrete syntax for models (.odpm), systems (.odps) and traces (.odpt).

Import ``odpcheck.dsl.parser`` / ``odpcheck.dsl.serializer`` directly; this
package stays import-light because the metamodel depends on ``dsl.spans``.
"""
